#include "synprime/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "synprime/error.hpp"

namespace synprime {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

constexpr char kMagic[8] = {'S', 'Y', 'N', 'P', 'R', 'I', 'M', 'E'};

class Writer {
 public:
  template <typename T>
  void put(T value) {
    char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    out_.append(raw, sizeof(T));
  }
  void u32(std::uint64_t v) {
    if (v > UINT32_MAX) throw DataError("checkpoint field exceeds 32 bits");
    put(static_cast<std::uint32_t>(v));
  }
  void i32(int v) { put(static_cast<std::int32_t>(v)); }
  void str(const std::string& s) {
    u32(s.size());
    out_ += s;
  }
  void raw(const void* data, std::size_t n) { out_.append(static_cast<const char*>(data), n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}

  template <typename T>
  T get() {
    T value;
    std::memcpy(&value, take(sizeof(T)), sizeof(T));
    return value;
  }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  int i32() { return get<std::int32_t>(); }
  std::string str() {
    const auto n = u32();
    return std::string(take(n), n);
  }
  const char* take(std::size_t n) {
    if (in_.size() - pos_ < n) throw DataError("checkpoint is truncated");
    const char* p = in_.data() + pos_;
    pos_ += n;
    return p;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  const std::string& in_;
  std::size_t pos_ = 0;
};

void write_hyper(Writer& w, const LstmHyper& h, const KGramHyper& k) {
  w.i32(h.nhid);
  w.i32(h.nlayers);
  w.i32(h.emb_dim);
  w.put(h.learning_rate);
  w.i32(h.bptt_len);
  w.i32(h.epochs);
  w.put(h.seed);
  w.put(h.corpus_tokens);
  w.i32(h.batch_size);
  w.put(h.init_scale);
  w.put(h.clip_norm);
  w.i32(h.min_count);
  w.i32(k.order);
  w.put(k.alpha);
  w.i32(k.min_count);
}

void read_hyper(Reader& r, LstmHyper& h, KGramHyper& k) {
  h.nhid = r.i32();
  h.nlayers = r.i32();
  h.emb_dim = r.i32();
  h.learning_rate = r.get<double>();
  h.bptt_len = r.i32();
  h.epochs = r.i32();
  h.seed = r.get<std::uint64_t>();
  h.corpus_tokens = r.get<std::uint64_t>();
  h.batch_size = r.i32();
  h.init_scale = r.get<double>();
  h.clip_norm = r.get<double>();
  h.min_count = r.i32();
  k.order = r.i32();
  k.alpha = r.get<double>();
  k.min_count = r.i32();
}

}  // namespace

std::string encode_checkpoint(const ModelSnapshot& snapshot) {
  snapshot.check();
  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.put(kCheckpointVersion);
  w.put(static_cast<std::uint32_t>(snapshot.backend));
  write_hyper(w, snapshot.hyper, snapshot.kgram);
  w.u32(static_cast<std::size_t>(snapshot.vocab.size()));
  for (const auto& t : snapshot.vocab.tokens()) w.str(t);
  w.str(snapshot.provenance.corpus_id);
  w.u32(snapshot.provenance.adaptations.size());
  for (const auto& a : snapshot.provenance.adaptations) w.str(a);

  if (snapshot.is_lstm()) {
    std::size_t n = 0;
    for_each_tensor(snapshot.lstm(), [&](const std::string&, const auto&) { ++n; });
    w.u32(n);
    for_each_tensor(snapshot.lstm(), [&](const std::string& name, const auto& t) {
      w.str(name);
      w.u32(static_cast<std::size_t>(t.rows()));
      w.u32(static_cast<std::size_t>(t.cols()));
      w.raw(t.data(), sizeof(float) * static_cast<std::size_t>(t.size()));
    });
  } else {
    const auto& table = snapshot.kgram_model().table();
    std::size_t n = 0;
    for (const auto& [ctx, row] : table) n += row.size();
    w.u32(n);
    for (const auto& [ctx, row] : table) {
      for (const auto& [next, count] : row) {
        for (const int id : ctx) w.u32(static_cast<std::uint32_t>(id));
        w.u32(static_cast<std::uint32_t>(next));
        w.put(count);
      }
    }
  }
  return w.take();
}

ModelSnapshot decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (bytes.size() < sizeof(kMagic) || std::memcmp(r.take(sizeof(kMagic)), kMagic, sizeof(kMagic)) != 0) {
    throw DataError("not a synprime checkpoint (bad magic)");
  }
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  }
  ModelSnapshot snap;
  const auto tag = r.u32();
  if (tag > static_cast<std::uint32_t>(Backend::RandomInitLstm)) {
    throw DataError("checkpoint has unknown backend tag " + std::to_string(tag));
  }
  snap.backend = static_cast<Backend>(tag);
  read_hyper(r, snap.hyper, snap.kgram);

  std::vector<std::string> tokens(r.u32());
  for (auto& t : tokens) t = r.str();
  snap.vocab = Vocabulary::from_tokens(std::move(tokens));
  snap.provenance.corpus_id = r.str();
  snap.provenance.adaptations.resize(r.u32());
  for (auto& a : snap.provenance.adaptations) a = r.str();

  if (snap.backend == Backend::KGram) {
    KGramModel model(snap.kgram.order, snap.kgram.alpha, snap.vocab.size(), snap.vocab.eos_id());
    const auto n = r.u32();
    std::vector<int> ngram(static_cast<std::size_t>(snap.kgram.order));
    for (std::uint32_t e = 0; e < n; ++e) {
      for (auto& id : ngram) id = static_cast<int>(r.u32());
      model.set_count(ngram, r.get<double>());
    }
    snap.params = std::move(model);
  } else {
    auto params = LstmParams<float>::zeros(snap.vocab.size(), snap.hyper.emb_dim, snap.hyper.nhid,
                                           snap.hyper.nlayers);
    std::size_t expected = 0;
    for_each_tensor(params, [&](const std::string&, const auto&) { ++expected; });
    if (r.u32() != expected) throw DataError("checkpoint tensor count does not match its hyperparameters");
    for_each_tensor(params, [&](const std::string& name, auto& t) {
      const auto stored = r.str();
      const auto rows = r.u32();
      const auto cols = r.u32();
      if (stored != name || rows != t.rows() || cols != t.cols()) {
        throw DataError("checkpoint tensor '" + stored + "' does not match expected '" + name + "'");
      }
      std::memcpy(t.data(), r.take(sizeof(float) * static_cast<std::size_t>(t.size())),
                  sizeof(float) * static_cast<std::size_t>(t.size()));
    });
    snap.params = std::move(params);
  }
  if (!r.done()) throw DataError("checkpoint has trailing bytes");
  snap.check();
  return snap;
}

void save_checkpoint(const std::filesystem::path& path, const ModelSnapshot& snapshot) {
  const std::string bytes = encode_checkpoint(snapshot);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ModelSnapshot load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return decode_checkpoint(buf.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace synprime
