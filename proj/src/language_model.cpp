#include "synprime/language_model.hpp"

#include <optional>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "synprime/error.hpp"
#include "synprime/random.hpp"

namespace synprime {

std::string_view to_string(Backend backend) {
  switch (backend) {
    case Backend::Lstm: return "lstm";
    case Backend::KGram: return "kgram";
    case Backend::RandomInitLstm: return "random-init-lstm";
  }
  return "unknown";
}

void LstmHyper::validate() const {
  if (nhid <= 0 || nlayers <= 0 || emb_dim <= 0 || bptt_len <= 0 || epochs < 0 ||
      batch_size <= 0 || min_count <= 0) {
    throw DataError("LSTM hyperparameters must be positive");
  }
  if (!(learning_rate >= 0.0) || !(init_scale >= 0.0) || !(clip_norm > 0.0)) {
    throw DataError("LSTM learning rate, init scale and clip norm must be non-negative");
  }
}

void ModelSnapshot::check() const {
  if (is_lstm()) {
    const auto& p = lstm();
    check_shapes(p);
    if (p.vocab_size() != vocab.size() || p.hidden_size() != hyper.nhid ||
        p.num_layers() != hyper.nlayers || p.embedding_size() != hyper.emb_dim) {
      throw NumericalError("LSTM parameter shapes do not match hyperparameters");
    }
  } else {
    const auto& k = kgram_model();
    if (k.vocab_size() != vocab.size() || k.order() != kgram.order) {
      throw NumericalError("k-gram table does not match its vocabulary");
    }
  }
}

namespace {

constexpr double kLn2 = std::numbers::ln2;

void check_ids(std::span<const int> ids, int vocab_size) {
  for (const int id : ids) {
    if (id < 0 || id >= vocab_size) throw DataError("token id out of vocabulary range");
  }
}

TokenSurprisals kgram_surprisal(const ModelSnapshot& snapshot, std::span<const std::string> sentence) {
  const auto& model = snapshot.kgram_model();
  const auto ids = snapshot.vocab.encode(sentence);
  TokenSurprisals ts;
  for (std::size_t t = 0; t < ids.size(); ++t) {
    const auto ctx = model.context_at(ids, t);
    ts.bits.push_back(-std::log2(model.probability(ctx, ids[t])));
    ts.masked.push_back(ids[t] == snapshot.vocab.unk_id());
  }
  return ts;
}

std::vector<TokenSurprisals> lstm_surprisal_batch(const ModelSnapshot& snapshot,
                                                  std::span<const Sentence> sentences) {
  constexpr std::size_t kChunk = 128;
  const auto& p = snapshot.lstm();
  const auto& vocab = snapshot.vocab;
  std::vector<TokenSurprisals> out(sentences.size());
  for (std::size_t start = 0; start < sentences.size(); start += kChunk) {
    const std::size_t count = std::min(kChunk, sentences.size() - start);
    std::size_t longest = 0;
    std::vector<std::vector<int>> ids(count);
    for (std::size_t b = 0; b < count; ++b) {
      ids[b] = vocab.encode(sentences[start + b]);
      longest = std::max(longest, ids[b].size());
    }
    const auto T = static_cast<Eigen::Index>(longest);
    const auto B = static_cast<Eigen::Index>(count);
    IdMatrix inputs = IdMatrix::Constant(T, B, vocab.eos_id());
    IdMatrix targets = IdMatrix::Constant(T, B, -1);
    for (Eigen::Index b = 0; b < B; ++b) {
      const auto& s = ids[static_cast<std::size_t>(b)];
      for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(s.size()); ++t) {
        if (t > 0) inputs(t, b) = s[static_cast<std::size_t>(t - 1)];
        targets(t, b) = s[static_cast<std::size_t>(t)];
      }
    }
    auto state = zero_state(p, static_cast<int>(B));
    const Matrix<float> logp = target_log_probs(p, inputs, targets, state);
    for (Eigen::Index b = 0; b < B; ++b) {
      const auto& s = ids[static_cast<std::size_t>(b)];
      auto& ts = out[start + static_cast<std::size_t>(b)];
      for (std::size_t t = 0; t < s.size(); ++t) {
        ts.bits.push_back(-static_cast<double>(logp(static_cast<Eigen::Index>(t), b)) / kLn2);
        ts.masked.push_back(s[t] == vocab.unk_id());
      }
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd forward(const ModelSnapshot& snapshot, std::span<const int> ids) {
  snapshot.check();
  check_ids(ids, snapshot.vocab.size());
  if (snapshot.is_lstm()) {
    return forward_distributions(snapshot.lstm(), std::vector<int>(ids.begin(), ids.end()))
        .cast<double>();
  }
  const auto& model = snapshot.kgram_model();
  Eigen::MatrixXd out(snapshot.vocab.size(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t t = 0; t < ids.size(); ++t) {
    const auto dist = model.distribution(model.context_at(ids, t + 1));
    out.col(static_cast<Eigen::Index>(t)) =
        Eigen::Map<const Eigen::VectorXd>(dist.data(), static_cast<Eigen::Index>(dist.size()));
  }
  return out;
}

TokenSurprisals surprisal(const ModelSnapshot& snapshot, std::span<const std::string> sentence) {
  if (sentence.empty()) throw DataError("cannot score an empty sentence");
  const Sentence copy(sentence.begin(), sentence.end());
  return surprisal_batch(snapshot, std::span<const Sentence>(&copy, 1)).front();
}

std::vector<TokenSurprisals> surprisal_batch(const ModelSnapshot& snapshot,
                                             std::span<const Sentence> sentences) {
  snapshot.check();
  for (const auto& s : sentences) {
    if (s.empty()) throw DataError("cannot score an empty sentence");
  }
  if (snapshot.is_lstm()) return lstm_surprisal_batch(snapshot, sentences);
  std::vector<TokenSurprisals> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(kgram_surprisal(snapshot, s));
  return out;
}

double mean_surprisal(const TokenSurprisals& ts) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < ts.bits.size(); ++i) {
    if (ts.masked[i]) continue;
    sum += ts.bits[i];
    ++n;
  }
  if (n == 0) throw DataError("all positions are masked");
  return sum / static_cast<double>(n);
}

double corpus_mean_surprisal(const ModelSnapshot& snapshot, const Corpus& corpus) {
  const auto all = surprisal_batch(snapshot, corpus);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& ts : all) {
    if (std::none_of(ts.masked.begin(), ts.masked.end(), [](bool m) { return !m; })) continue;
    sum += mean_surprisal(ts);
    ++n;
  }
  if (n == 0) throw DataError("no scorable sentences");
  return sum / static_cast<double>(n);
}

namespace {

template <typename Scalar>
void sentence_matrices(const std::vector<int>& ids, int eos_id, IdMatrix& inputs,
                       IdMatrix& targets) {
  const auto n = static_cast<Eigen::Index>(ids.size());
  inputs.resize(n + 1, 1);
  targets.resize(n + 1, 1);
  inputs(0, 0) = eos_id;
  for (Eigen::Index t = 0; t < n; ++t) {
    inputs(t + 1, 0) = ids[static_cast<std::size_t>(t)];
    targets(t, 0) = ids[static_cast<std::size_t>(t)];
  }
  targets(n, 0) = eos_id;
}

template <typename Scalar>
Scalar sentence_loss(const LstmParams<Scalar>& params, std::span<const std::vector<int>> batch,
                     int eos_id) {
  Scalar loss(0);
  IdMatrix inputs, targets;
  for (const auto& ids : batch) {
    sentence_matrices<Scalar>(ids, eos_id, inputs, targets);
    auto state = zero_state(params, 1);
    loss -= target_log_probs(params, inputs, targets, state).sum();
  }
  return loss;
}

}  // namespace

template <typename Scalar>
Scalar sentence_loss_and_gradient(const LstmParams<Scalar>& params,
                                  std::span<const std::vector<int>> batch, int eos_id,
                                  LstmParams<Scalar>& grad) {
  Scalar loss(0);
  IdMatrix inputs, targets;
  for (const auto& ids : batch) {
    sentence_matrices<Scalar>(ids, eos_id, inputs, targets);
    auto state = zero_state(params, 1);
    loss += loss_and_gradient(params, inputs, targets, state, grad);
  }
  return loss;
}

template float sentence_loss_and_gradient<float>(const LstmParams<float>&,
                                                 std::span<const std::vector<int>>, int,
                                                 LstmParams<float>&);
template double sentence_loss_and_gradient<double>(const LstmParams<double>&,
                                                   std::span<const std::vector<int>>, int,
                                                   LstmParams<double>&);

ModelSnapshot random_init(const LstmHyper& hyper, const Vocabulary& vocab, std::uint64_t seed) {
  hyper.validate();
  ModelSnapshot snap;
  snap.backend = Backend::RandomInitLstm;
  snap.vocab = vocab;
  snap.hyper = hyper;
  snap.provenance.corpus_id = "untrained";
  auto params = LstmParams<float>::zeros(vocab.size(), hyper.emb_dim, hyper.nhid, hyper.nlayers);
  Rng rng(seed);
  for_each_tensor(params, [&](const std::string& name, auto& t) {
    if (name.ends_with("bias")) return;
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      for (Eigen::Index i = 0; i < t.rows(); ++i) {
        t(i, j) = static_cast<float>(hyper.init_scale * rng.normal());
      }
    }
  });
  snap.params = std::move(params);
  return snap;
}

ModelSnapshot empty_kgram(const KGramHyper& hyper, const Vocabulary& vocab) {
  ModelSnapshot snap;
  snap.backend = Backend::KGram;
  snap.vocab = vocab;
  snap.kgram = hyper;
  snap.params = KGramModel(hyper.order, hyper.alpha, vocab.size(), vocab.eos_id());
  snap.provenance.corpus_id = "untrained";
  return snap;
}

ModelSnapshot train_kgram(const Corpus& corpus, const KGramHyper& hyper, std::string corpus_id) {
  if (corpus.empty()) throw DataError("training corpus is empty");
  ModelSnapshot snap = empty_kgram(hyper, Vocabulary::build(corpus, hyper.min_count));
  auto& model = snap.kgram_model();
  for (const auto& s : corpus) model.add_sentence(snap.vocab.encode(s));
  snap.provenance.corpus_id = std::move(corpus_id);
  return snap;
}

namespace {

// Lays the stream out as `batch` contiguous columns; row t+1 holds the targets of row t.
IdMatrix batchify(const std::vector<int>& stream, int batch, int& columns_out) {
  const auto usable = static_cast<Eigen::Index>(stream.size()) - 1;
  const Eigen::Index b = std::max<Eigen::Index>(1, std::min<Eigen::Index>(batch, usable));
  const Eigen::Index len = usable / b;
  IdMatrix data(len + 1, b);
  for (Eigen::Index col = 0; col < b; ++col) {
    for (Eigen::Index t = 0; t <= len; ++t) {
      data(t, col) = stream[static_cast<std::size_t>(col * len + t)];
    }
  }
  columns_out = static_cast<int>(b);
  return data;
}

// Bits per token over a held-out stream, read the same way training reads its
// stream: contiguous columns, state carried across bptt_len chunks.
double stream_bits(const LstmParams<float>& params, const std::vector<int>& stream, int batch,
                   int bptt_len) {
  if (stream.size() < 2) return 0.0;
  int columns = 0;
  const IdMatrix data = batchify(stream, batch, columns);
  const Eigen::Index length = data.rows() - 1;
  auto state = zero_state(params, columns);
  double nats = 0.0;
  for (Eigen::Index start = 0; start < length; start += bptt_len) {
    const Eigen::Index T = std::min<Eigen::Index>(bptt_len, length - start);
    nats -= target_log_probs(params, IdMatrix(data.middleRows(start, T)),
                             IdMatrix(data.middleRows(start + 1, T)), state)
                .cast<double>()
                .sum();
  }
  return nats / static_cast<double>(length * columns) / std::numbers::ln2;
}

}  // namespace

ModelSnapshot train_lstm(const Corpus& corpus, const LstmHyper& hyper, std::string corpus_id,
                         const std::function<void(const EpochReport&)>& on_epoch) {
  hyper.validate();
  if (corpus.empty()) throw DataError("training corpus is empty");

  std::size_t n_validation = corpus.size() >= 20 ? std::max<std::size_t>(1, corpus.size() / 20) : 0;
  const Corpus train(corpus.begin(), corpus.end() - static_cast<std::ptrdiff_t>(n_validation));
  const Corpus validation(corpus.end() - static_cast<std::ptrdiff_t>(n_validation), corpus.end());

  const Vocabulary vocab = Vocabulary::build(train, hyper.min_count);
  const auto stream = encode_stream(vocab, train);
  const auto validation_stream = encode_stream(vocab, validation);
  if (stream.size() < static_cast<std::size_t>(hyper.bptt_len) + 1) {
    throw DataError("training corpus (" + std::to_string(stream.size()) +
                    " stream tokens) is smaller than bptt_len");
  }

  ModelSnapshot snap = random_init(hyper, vocab, hyper.seed);
  snap.backend = Backend::Lstm;
  snap.provenance.corpus_id = std::move(corpus_id);
  auto& params = snap.lstm();

  int columns = 0;
  const IdMatrix data = batchify(stream, std::min(hyper.batch_size, static_cast<int>(
                                                      (stream.size() - 1) / hyper.bptt_len)),
                                 columns);
  const Eigen::Index length = data.rows() - 1;
  auto grad = LstmParams<float>::zeros(vocab.size(), hyper.emb_dim, hyper.nhid, hyper.nlayers);

  float lr = static_cast<float>(hyper.learning_rate);
  double best = std::numeric_limits<double>::infinity();
  std::optional<LstmParams<float>> best_params;  // weights from the best validation epoch
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    auto state = zero_state(params, columns);
    double loss_sum = 0.0;
    double token_sum = 0.0;
    for (Eigen::Index start = 0; start < length; start += hyper.bptt_len) {
      const Eigen::Index T = std::min<Eigen::Index>(hyper.bptt_len, length - start);
      const IdMatrix inputs = data.middleRows(start, T);
      const IdMatrix targets = data.middleRows(start + 1, T);
      set_zero(grad);
      const float loss = loss_and_gradient(params, inputs, targets, state, grad);
      const auto tokens = static_cast<float>(T * columns);
      loss_sum += loss;
      token_sum += tokens;
      scale(grad, 1.0f / tokens);
      clip_global_norm(grad, static_cast<float>(hyper.clip_norm));
      if (lr != 0.0f) add_scaled(params, grad, -lr);
    }

    EpochReport report{epoch, lr, token_sum > 0 ? loss_sum / token_sum : 0.0, 0.0};
    if (!validation.empty()) {
      report.validation_bits = stream_bits(params, validation_stream, hyper.batch_size, hyper.bptt_len);
      if (report.validation_bits >= best) {
        lr /= 4.0f;
      } else {
        best = report.validation_bits;
        best_params = params;
      }
    }
    if (on_epoch) on_epoch(report);
  }
  if (best_params) params = *best_params;
  return snap;
}

ModelSnapshot adapt(const ModelSnapshot& snapshot, std::span<const Sentence> sentences,
                    const AdaptConfig& config, const std::string& set_id) {
  if (sentences.empty()) throw DataError("adaptation set '" + set_id + "' is empty");
  snapshot.check();
  ModelSnapshot out = snapshot;
  out.provenance.adaptations.push_back(set_id);
  if (config.learning_rate == 0.0) return out;

  if (!out.is_lstm()) {
    auto& model = out.kgram_model();
    for (const auto& s : sentences) model.add_sentence(out.vocab.encode(s), config.count_increment);
    return out;
  }

  auto& params = out.lstm();
  auto grad = LstmParams<float>::zeros(params.vocab_size(), params.embedding_size(),
                                       params.hidden_size(), params.num_layers());
  const auto lr = static_cast<float>(config.learning_rate);
  for (const auto& s : sentences) {
    const std::vector<int> ids = out.vocab.encode(s);
    set_zero(grad);
    sentence_loss_and_gradient(params, std::span<const std::vector<int>>(&ids, 1),
                               out.vocab.eos_id(), grad);
    scale(grad, 1.0f / static_cast<float>(ids.size() + 1));
    clip_global_norm(grad, static_cast<float>(config.clip_norm));
    add_scaled(params, grad, -lr);
  }
  return out;
}

double gradient_check(const LstmParams<double>& params, std::span<const std::vector<int>> batch,
                      const GradientCheckOptions& options) {
  check_shapes(params);
  const int eos = 1;
  for (const auto& ids : batch) check_ids(ids, params.vocab_size());

  auto grad = LstmParams<double>::zeros(params.vocab_size(), params.embedding_size(),
                                        params.hidden_size(), params.num_layers());
  sentence_loss_and_gradient(params, batch, eos, grad);

  struct TensorRef {
    double* value;
    const double* analytic;
    Eigen::Index size;
  };
  LstmParams<double> probe = params;
  std::vector<TensorRef> refs;
  for_each_tensor(probe, [&](const std::string&, auto& t) {
    refs.push_back({t.data(), nullptr, t.size()});
  });
  std::size_t k = 0;
  for_each_tensor(grad, [&](const std::string&, const auto& t) { refs[k++].analytic = t.data(); });

  Rng rng(options.seed);
  double worst = 0.0;
  for (const auto& ref : refs) {
    std::vector<Eigen::Index> picks;
    if (ref.size <= options.samples_per_tensor) {
      for (Eigen::Index i = 0; i < ref.size; ++i) picks.push_back(i);
    } else {
      for (int s = 0; s < options.samples_per_tensor; ++s) {
        picks.push_back(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(ref.size))));
      }
    }
    for (const auto i : picks) {
      const double original = ref.value[i];
      ref.value[i] = original + options.step;
      const double up = sentence_loss(probe, batch, eos);
      ref.value[i] = original - options.step;
      const double down = sentence_loss(probe, batch, eos);
      ref.value[i] = original;
      const double fd = (up - down) / (2.0 * options.step);
      const double analytic = ref.analytic[i];
      worst = std::max(worst, std::abs(analytic - fd) / (std::abs(analytic) + std::abs(fd) + 1e-12));
    }
  }
  return worst;
}

double gradient_check(const ModelSnapshot& snapshot, std::span<const std::vector<int>> batch,
                      const GradientCheckOptions& options) {
  if (!snapshot.is_lstm()) throw DataError("gradient check applies to LSTM snapshots only");
  snapshot.check();
  if (snapshot.vocab.eos_id() != 1) throw DataError("unexpected <eos> id");
  return gradient_check(snapshot.lstm().cast<double>(), batch, options);
}

}  // namespace synprime
