#include "synprime/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "synprime/agreement.hpp"
#include "synprime/checkpoint.hpp"
#include "synprime/error.hpp"
#include "synprime/hierarchy.hpp"
#include "synprime/priming.hpp"
#include "synprime/svg.hpp"

namespace synprime {

using json = nlohmann::json;
namespace fs = std::filesystem;

void RunConfig::validate() const {
  if (grid.empty()) throw DataError("config grid is empty");
  for (const auto& g : grid) {
    if (g.nhid <= 0 || g.corpus_tokens == 0) throw DataError("grid points need positive nhid and corpus_tokens");
  }
  if (backend != "lstm" && backend != "kgram") throw DataError("backend must be \"lstm\" or \"kgram\"");
  std::set<std::pair<int, std::uint64_t>> points;
  for (const auto& g : grid) {
    // k-gram models have no hidden size, so only the corpus size tells points apart.
    const int key = backend == "kgram" ? 0 : g.nhid;
    if (!points.insert({key, g.corpus_tokens}).second) {
      throw DataError("config grid repeats a point (nhid " + std::to_string(g.nhid) + ", corpus_tokens " +
                      std::to_string(g.corpus_tokens) + ")" + (backend == "kgram" ? " for the kgram backend" : ""));
    }
  }
  if (corpus_source != "synthetic" && corpus_source != "file") {
    throw DataError("corpus.source must be \"synthetic\" or \"file\"");
  }
  if (corpus_source == "file" && corpus_path.empty()) throw DataError("corpus.path is required for file corpora");
  if (corpus_slices < 1) throw DataError("corpus.slices must be at least 1");
  if (n_lists < 0 || agreement_pairs < 0) throw DataError("n_lists and agreement_pairs must be non-negative");
  if (list_sizes.adaptation < 1 || list_sizes.test < 1) throw DataError("set sizes must be positive");
  if (bootstrap_resamples < 0 || permutations < 0) throw DataError("resample counts must be non-negative");
  if (workers < 1) throw DataError("workers must be at least 1");
  if (!(adapt.learning_rate >= 0.0) || !(adapt.clip_norm > 0.0)) throw DataError("bad adapt settings");
  noise.validate();
  LstmHyper h = lstm;
  h.nhid = grid.front().nhid;
  if (emb_equals_nhid) h.emb_dim = h.nhid;
  h.validate();
}

namespace {

class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw DataError(where_ + " must be a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw DataError(where_ + "." + key + ": " + e.what());
    }
  }
  void path(const char* key, fs::path& out, const fs::path& base) {
    std::string text;
    get(key, text);
    if (!text.empty()) out = base / text;
  }
  const json* child(const char* key) {
    used_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }
  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.contains(key)) throw DataError("unknown config key '" + where_ + "." + key + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

}  // namespace

RunConfig parse_config(const std::string& json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw DataError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Fields f(j, "config");
  std::string schema = "synprime-config/1";
  f.get("schema", schema);
  if (schema != "synprime-config/1") throw DataError("config schema '" + schema + "' is not supported");
  f.path("lexicon", c.lexicon, base_dir);
  f.path("output_dir", c.output_dir, base_dir);
  if (const auto* corpus = f.child("corpus")) {
    Fields g(*corpus, "corpus");
    g.get("source", c.corpus_source);
    g.path("path", c.corpus_path, base_dir);
    g.get("slices", c.corpus_slices);
    g.finish();
  }
  if (const auto* grammar = f.child("grammar")) {
    Fields g(*grammar, "grammar");
    auto& w = c.grammar;
    g.get("transitive", w.transitive);
    g.get("passive", w.passive);
    g.get("copula", w.copula);
    g.get("modified_copula", w.modified_copula);
    g.get("coordination", w.coordination);
    g.get("subject_modified", w.subject_modified);
    g.get("object_modified", w.object_modified);
    g.finish();
  }
  f.get("backend", c.backend);
  if (const auto* grid = f.child("grid")) {
    if (!grid->is_array()) throw DataError("config.grid must be an array");
    c.grid.clear();
    for (const auto& point : *grid) {
      GridPoint p;
      Fields g(point, "grid[]");
      g.get("nhid", p.nhid);
      g.get("corpus_tokens", p.corpus_tokens);
      g.finish();
      c.grid.push_back(p);
    }
  }
  if (const auto* lstm = f.child("lstm")) {
    Fields g(*lstm, "lstm");
    auto& h = c.lstm;
    g.get("nlayers", h.nlayers);
    if (lstm->contains("emb_dim")) {
      c.emb_equals_nhid = false;
      g.get("emb_dim", h.emb_dim);
    }
    g.get("learning_rate", h.learning_rate);
    g.get("bptt_len", h.bptt_len);
    g.get("epochs", h.epochs);
    g.get("batch_size", h.batch_size);
    g.get("init_scale", h.init_scale);
    g.get("clip_norm", h.clip_norm);
    g.get("min_count", h.min_count);
    g.finish();
  }
  if (const auto* kgram = f.child("kgram")) {
    Fields g(*kgram, "kgram");
    g.get("order", c.kgram.order);
    g.get("alpha", c.kgram.alpha);
    g.get("min_count", c.kgram.min_count);
    g.finish();
  }
  f.get("baselines", c.baselines);
  f.get("n_lists", c.n_lists);
  f.get("adaptation_size", c.list_sizes.adaptation);
  f.get("test_size", c.list_sizes.test);
  if (const auto* noise = f.child("noise")) {
    Fields g(*noise, "noise");
    g.get("p_plural", c.noise.p_plural);
    g.get("p_adjective", c.noise.p_adjective);
    g.get("p_intensifier", c.noise.p_intensifier);
    g.get("p_adverb_present", c.noise.p_adverb_present);
    g.get("p_postverbal", c.noise.p_postverbal);
    g.finish();
  }
  if (const auto* adapt = f.child("adapt")) {
    Fields g(*adapt, "adapt");
    g.get("learning_rate", c.adapt.learning_rate);
    g.get("clip_norm", c.adapt.clip_norm);
    g.get("count_increment", c.adapt.count_increment);
    g.finish();
  }
  f.get("agreement_pairs", c.agreement_pairs);
  f.get("seed", c.seed);
  f.get("bootstrap_resamples", c.bootstrap_resamples);
  f.get("permutations", c.permutations);
  std::string scope = "model";
  f.get("fit_scope", scope);
  if (scope != "model" && scope != "cell") throw DataError("fit_scope must be \"model\" or \"cell\"");
  c.fit_scope = scope == "cell" ? FitScope::PerCell : FitScope::PerModel;
  f.get("workers", c.workers);
  f.finish();
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

void apply_environment(RunConfig& config) {
  if (const char* dir = std::getenv("SYNPRIME_OUTPUT_DIR"); dir && *dir) config.output_dir = dir;
  if (const char* w = std::getenv("SYNPRIME_WORKERS"); w && *w) {
    try {
      config.workers = std::stoi(w);
    } catch (const std::exception&) {
      throw DataError(std::string("SYNPRIME_WORKERS is not an integer: ") + w);
    }
  }
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::ifstream open_input(const fs::path& path, const std::string& hint) {
  std::ifstream in(path);
  if (!in) throw DataError("missing " + path.string() + " (" + hint + ")");
  return in;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::uint64_t key(std::string_view s) { return hash_string(s); }

fs::path lists_path(const RunConfig& c) { return c.output_dir / "corpora" / "lists.tsv"; }
fs::path train_path(const RunConfig& c) { return c.output_dir / "corpora" / "train.txt"; }
fs::path pairs_path(const RunConfig& c) { return c.output_dir / "corpora" / "agreement_pairs.tsv"; }
fs::path checkpoints_dir(const RunConfig& c) { return c.output_dir / "checkpoints"; }
fs::path records_path(const RunConfig& c) { return c.output_dir / "records" / "records.tsv"; }
fs::path analysis_dir(const RunConfig& c) { return c.output_dir / "analysis"; }
fs::path report_dir(const RunConfig& c) { return c.output_dir / "report"; }

std::uint64_t max_corpus_tokens(const RunConfig& c) {
  std::uint64_t m = 0;
  for (const auto& g : c.grid) m = std::max(m, g.corpus_tokens);
  return m;
}

// Held-out text is generated past the training slices: 5% of their size, at least 2000 tokens.
std::uint64_t heldout_tokens(const RunConfig& c) {
  return std::max<std::uint64_t>(2000, max_corpus_tokens(c) * static_cast<std::uint64_t>(c.corpus_slices) / 20);
}

}  // namespace

void cmd_gen(const RunConfig& config, std::ostream& log) {
  config.validate();
  const auto [lexicon, compat] = load_lexicon(config.lexicon);
  const auto counts = count_entries(lexicon);
  log << "lexicon: " << counts.nouns << " nouns, " << counts.verbs << " verbs, " << counts.adverbs
      << " adverbs, " << counts.adjectives << " adjectives, " << counts.intensifiers << " intensifiers\n";

  NoiseConfig noise = config.noise;
  noise.rng_seed = derive_seed(config.seed, {key("lists")});
  const auto lists = generate_lists(lexicon, compat, config.n_lists, noise, config.list_sizes);
  std::ostringstream lists_text;
  write_lists(lists_text, lists);
  write_file(lists_path(config), lists_text.str());
  log << "wrote " << lists.size() << " lists to " << lists_path(config).string() << '\n';

  json manifest = {{"schema", "synprime-gen-manifest/1"},
                   {"seed", config.seed},
                   {"lists_seed", noise.rng_seed},
                   {"n_lists", config.n_lists},
                   {"adaptation_size", config.list_sizes.adaptation},
                   {"test_size", config.list_sizes.test},
                   {"lexicon",
                    {{"nouns", counts.nouns},
                     {"verbs", counts.verbs},
                     {"adverbs", counts.adverbs},
                     {"adjectives", counts.adjectives},
                     {"intensifiers", counts.intensifiers}}}};

  if (config.corpus_source == "synthetic") {
    SyntheticCorpusConfig sc;
    sc.target_tokens = max_corpus_tokens(config) * static_cast<std::uint64_t>(config.corpus_slices) +
                       heldout_tokens(config) + 200;
    sc.seed = derive_seed(config.seed, {key("corpus")});
    sc.noise = config.noise;
    sc.grammar = config.grammar;
    const Corpus corpus = generate_synthetic_corpus(lexicon, compat, sc);
    std::ostringstream text;
    write_corpus(text, corpus);
    write_file(train_path(config), text.str());
    manifest["corpus"] = {{"source", "synthetic"},
                          {"seed", sc.seed},
                          {"sentences", corpus.size()},
                          {"tokens", token_count(corpus)}};
    log << "wrote synthetic corpus: " << corpus.size() << " sentences, " << token_count(corpus)
        << " tokens\n";
  } else {
    manifest["corpus"] = {{"source", "file"}, {"path", config.corpus_path.string()}};
  }

  const auto pairs = generate_agreement_pairs(lexicon, compat, config.agreement_pairs,
                                              derive_seed(config.seed, {key("agreement")}));
  std::ostringstream pairs_text;
  write_pairs(pairs_text, pairs);
  write_file(pairs_path(config), pairs_text.str());
  manifest["agreement_pairs"] = pairs.size();
  write_file(config.output_dir / "corpora" / "manifest.json", dump(manifest));
}

namespace {

std::string model_id(const RunConfig& c, const GridPoint& g, const std::string& suffix) {
  if (c.backend == "kgram") return "kgram-c" + std::to_string(g.corpus_tokens) + "-" + suffix;
  return "h" + std::to_string(g.nhid) + "-c" + std::to_string(g.corpus_tokens) + "-" + suffix;
}

Corpus prefix_tokens(const Corpus& slice, std::uint64_t tokens) {
  Corpus out;
  std::uint64_t n = 0;
  for (const auto& s : slice) {
    if (n >= tokens) break;
    out.push_back(s);
    n += s.size();
  }
  return out;
}

json manifest_entry(const ModelManifestEntry& e) {
  json j = {{"id", e.info.id},
            {"backend", e.backend},
            {"nhid", e.info.nhid},
            {"corpus_tokens", e.info.corpus_tokens},
            {"corpus", e.info.corpus},
            {"baseline", e.info.baseline},
            {"checkpoint", e.checkpoint.string()}};
  j["heldout_bits"] = e.heldout_bits ? json(*e.heldout_bits) : json(nullptr);
  return j;
}

}  // namespace

void cmd_train(const RunConfig& config, std::ostream& log) {
  config.validate();
  const Corpus corpus = config.corpus_source == "synthetic"
                            ? [&] {
                                if (!fs::exists(train_path(config))) {
                                  throw DataError("missing " + train_path(config).string() + " (run gen first)");
                                }
                                return read_corpus_file(train_path(config));
                              }()
                            : read_corpus_file(config.corpus_path);
  const auto slices = corpus_slices(corpus, config.corpus_slices, max_corpus_tokens(config));
  std::size_t used = 0;
  for (const auto& s : slices) used += s.size();
  const Corpus heldout(corpus.begin() + static_cast<std::ptrdiff_t>(used),
                       corpus.begin() + static_cast<std::ptrdiff_t>(std::min(corpus.size(), used + 2000)));
  if (heldout.empty()) log << "note: no text left after the training slices; held-out surprisal not reported\n";

  const auto evaluate = [&](const ModelSnapshot& m) -> std::optional<double> {
    if (heldout.empty()) return std::nullopt;
    return corpus_mean_surprisal(m, heldout);
  };

  std::vector<ModelManifestEntry> entries;
  const auto save = [&](const ModelSnapshot& snap, ModelManifestEntry entry) {
    entry.checkpoint = entry.info.id + ".ckpt";
    entry.backend = std::string(to_string(snap.backend));
    entry.heldout_bits = evaluate(snap);
    save_checkpoint(checkpoints_dir(config) / entry.checkpoint, snap);
    log << "saved " << entry.info.id;
    if (entry.heldout_bits) log << " (held-out " << *entry.heldout_bits << " bits)";
    log << '\n';
    entries.push_back(std::move(entry));
  };

  for (const auto& g : config.grid) {
    std::optional<Vocabulary> first_vocab;
    LstmHyper hyper = config.lstm;
    hyper.nhid = g.nhid;
    if (config.emb_equals_nhid) hyper.emb_dim = g.nhid;
    hyper.corpus_tokens = g.corpus_tokens;
    for (int k = 0; k < config.corpus_slices; ++k) {
      const Corpus train = prefix_tokens(slices[static_cast<std::size_t>(k)], g.corpus_tokens);
      const std::string id = model_id(config, g, "s" + std::to_string(k));
      const std::string corpus_id = "slice" + std::to_string(k) + "-" + std::to_string(g.corpus_tokens);
      ModelSnapshot snap;
      try {
        if (config.backend == "kgram") {
          snap = train_kgram(train, config.kgram, corpus_id);
        } else {
          hyper.seed = derive_seed(config.seed, {key("train"), static_cast<std::uint64_t>(g.nhid),
                                                 g.corpus_tokens, static_cast<std::uint64_t>(k)});
          log << "training " << id << " on " << token_count(train) << " tokens\n";
          snap = train_lstm(train, hyper, corpus_id, [&](const EpochReport& r) {
            log << "  epoch " << r.epoch + 1 << ": lr " << r.learning_rate << ", train loss " << r.train_loss
                << " nats, validation " << r.validation_bits << " bits\n";
          });
        }
      } catch (const DataError& e) {
        throw DataError("training " + id + " failed: " + e.what());
      }
      if (!first_vocab) first_vocab = snap.vocab;
      save(snap, {{id, g.nhid, g.corpus_tokens, "slice" + std::to_string(k), false}, "", "", std::nullopt});
    }
    if (config.baselines) {
      const std::string id = model_id(config, g, config.backend == "kgram" ? "empty" : "init");
      ModelSnapshot base = config.backend == "kgram"
                               ? empty_kgram(config.kgram, *first_vocab)
                               : random_init(hyper, *first_vocab,
                                             derive_seed(config.seed, {key("init"), static_cast<std::uint64_t>(g.nhid),
                                                                       g.corpus_tokens}));
      save(base, {{id, g.nhid, g.corpus_tokens, "none", true}, "", "", std::nullopt});
    }
  }

  json models = json::array();
  for (const auto& e : entries) models.push_back(manifest_entry(e));
  write_file(checkpoints_dir(config) / "manifest.json",
             dump({{"schema", "synprime-models/1"}, {"models", models}}));
}

std::vector<ModelManifestEntry> read_model_manifest(const fs::path& output_dir) {
  const auto path = output_dir / "checkpoints" / "manifest.json";
  auto in = open_input(path, "run train first");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  if (j.value("schema", "") != "synprime-models/1") {
    throw DataError(path.string() + ": schema mismatch (expected synprime-models/1)");
  }
  std::vector<ModelManifestEntry> out;
  try {
    for (const auto& m : j.at("models")) {
      ModelManifestEntry e;
      e.info = {m.at("id").get<std::string>(), m.at("nhid").get<int>(),
                m.at("corpus_tokens").get<std::uint64_t>(), m.at("corpus").get<std::string>(),
                m.at("baseline").get<bool>()};
      e.backend = m.at("backend").get<std::string>();
      e.checkpoint = m.at("checkpoint").get<std::string>();
      if (!m.at("heldout_bits").is_null()) e.heldout_bits = m.at("heldout_bits").get<double>();
      out.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return out;
}

void cmd_run(const RunConfig& config, std::ostream& log, bool fresh) {
  config.validate();
  auto in = open_input(lists_path(config), "run gen first");
  ExperimentPlan plan;
  plan.lists = to_stimuli(read_lists(in));
  for (const auto& m : read_model_manifest(config.output_dir)) {
    plan.models.push_back({m.info.id, checkpoints_dir(config) / m.checkpoint, nullptr});
  }
  plan.adapt = config.adapt;
  plan.output = records_path(config);
  plan.workers = config.workers;
  const GridResult result = fresh ? run_grid(plan) : resume_grid(plan);
  for (const auto& e : result.excluded) log << "excluded: " << e << '\n';
  log << "computed " << result.cells_computed << " cells; " << result.records.size() << " records in "
      << plan.output.string() << '\n';
}

namespace {

std::string format9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void cmd_analyze(const RunConfig& config, std::ostream& log) {
  config.validate();
  if (!fs::exists(records_path(config))) {
    throw DataError("missing " + records_path(config).string() + " (run the grid first)");
  }
  const auto records = read_records_file(records_path(config));
  if (records.empty()) throw DataError("no records in " + records_path(config).string());
  const auto manifest = read_model_manifest(config.output_dir);

  AnalysisInputs in;
  for (const auto& m : manifest) in.models[m.info.id] = m.info;
  in.permutation = {config.permutations, derive_seed(config.seed, {key("permutation")})};

  const EffectSet effects = regress_out_surprisal(raw_adaptation(records), config.fit_scope);
  for (const auto& w : effects.warnings) log << "warning: " << w << '\n';
  in.effects = effects.effects;

  const fs::path dir = analysis_dir(config);
  {
    std::ostringstream out;
    out << "#synprime-fits\t1\n" << "group\tbeta0\tbeta1\tse_beta1\tsurp_mean\tn\tdegenerate\n";
    for (const auto& [group, fit] : effects.fits) {
      out << group << '\t' << format9(fit.beta0) << '\t' << format9(fit.beta1) << '\t' << format9(fit.se_beta1)
          << '\t' << format9(fit.surp_mean) << '\t' << fit.residuals.size() << '\t'
          << (fit.degenerate ? "yes" : "no") << '\n';
    }
    write_file(dir / "fits.tsv", out.str());
  }

  std::ostringstream distances;
  distances << "#synprime-distances\t1\n" << "group\tclass\trow\tratio\n";
  std::optional<AdaptationMatrix> trained_matrix;
  for (const bool baseline : {false, true}) {
    std::vector<AdaptationEffect> group;
    for (const auto& e : in.effects) {
      const auto it = in.models.find(e.key.model_id);
      if (it == in.models.end()) throw DataError("records refer to unknown model '" + e.key.model_id + "'");
      if (it->second.baseline == baseline) group.push_back(e);
    }
    if (group.empty()) continue;
    const std::string label = baseline ? "baseline" : "trained";
    const auto matrix =
        adaptation_matrix(group, {config.bootstrap_resamples, derive_seed(config.seed, {key("bootstrap")})});
    std::ostringstream m;
    write_matrix(m, matrix);
    write_file(dir / ("matrix_" + label + ".tsv"), m.str());
    for (const auto& cls : {same_rc_class(), reduction_class(), any_rc_class()}) {
      const auto d = distance_ratio(matrix, cls);
      for (const auto& [row, ratio] : d.rows) {
        distances << label << '\t' << cls.name << '\t' << name(row) << '\t' << (ratio ? format9(*ratio) : "NA")
                  << '\n';
      }
      distances << label << '\t' << cls.name << "\tD\t" << (d.d ? format9(*d.d) : "NA") << '\n';
    }
    if (!baseline) trained_matrix = matrix;
  }
  write_file(dir / "distances.tsv", distances.str());

  if (fs::exists(pairs_path(config))) {
    const auto pairs = read_pairs_file(pairs_path(config));
    std::ostringstream out;
    out << "#synprime-agreement\t1\n" << "model_id\tconstruction\taccuracy\tpairs\tties\n";
    for (const auto& m : manifest) {
      const auto snap = load_checkpoint(checkpoints_dir(config) / m.checkpoint);
      const auto scores = agreement_accuracy(snap, pairs);
      for (const auto& [construction, s] : scores) {
        out << m.info.id << '\t' << construction << '\t' << format9(s.accuracy) << '\t' << s.pairs << '\t'
            << s.ties << '\n';
      }
      in.agreement[m.info.id] = scores;
    }
    write_file(dir / "agreement.tsv", out.str());
  } else {
    log << "note: no agreement pairs found; agreement analysis skipped\n";
  }

  if (trained_matrix) {
    const auto report = analysis_suite(in);
    std::ostringstream text, tsv;
    write_report_text(text, report);
    tsv << "#synprime-stats\t1\n";
    write_report_tsv(tsv, report);
    write_file(dir / "stats.txt", text.str());
    write_file(dir / "stats.tsv", tsv.str());
    write_file(dir / "hierarchy.txt", build_hierarchy(*trained_matrix).to_text());
  } else {
    log << "note: only baseline models present; statistics and hierarchy skipped\n";
  }
  log << "analysis written to " << dir.string() << '\n';
}

namespace {

AdaptationMatrix read_matrix_file(const fs::path& path) {
  auto in = open_input(path, "run analyze first");
  try {
    return read_matrix(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string read_text(const fs::path& path) {
  auto in = open_input(path, "run analyze first");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

void cmd_report(const RunConfig& config, std::ostream& log) {
  const fs::path dir = analysis_dir(config);
  const fs::path out = report_dir(config);
  std::ostringstream summary;
  bool any = false;
  for (const std::string label : {"trained", "baseline"}) {
    const auto path = dir / ("matrix_" + label + ".tsv");
    if (!fs::exists(path)) continue;
    any = true;
    const auto matrix = read_matrix_file(path);
    write_file(out / ("heatmap_" + label + ".svg"),
               heatmap_svg(matrix, "Adaptation effect, " + label + " models"));
    if (label == "trained") {
      const auto tree = build_hierarchy(matrix);
      write_file(out / "dendrogram.svg", dendrogram_svg(tree, "Structure hierarchy, trained models"));
      summary << "Hierarchy (trained models)\n" << tree.to_text() << '\n';
    }
  }
  if (!any) throw DataError("no matrices in " + dir.string() + " (run analyze first)");
  summary << "Distance ratios\n" << read_text(dir / "distances.tsv") << '\n';
  if (fs::exists(dir / "stats.txt")) summary << read_text(dir / "stats.txt");
  write_file(out / "summary.txt", summary.str());
  log << "report written to " << out.string() << '\n';
}

bool cmd_selftest(std::ostream& log) {
  bool ok = true;
  const auto check = [&](const std::string& what, bool pass, const std::string& detail) {
    log << (pass ? "PASS " : "FAIL ") << what << " (" << detail << ")\n";
    ok = ok && pass;
  };

  {
    Rng rng(7);
    auto p = LstmParams<double>::zeros(12, 5, 6, 2);
    for_each_tensor(p, [&](const std::string&, auto& t) {
      for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = 0.4 * rng.normal();
    });
    const std::vector<std::vector<int>> batch = {{2, 5, 7, 3}, {4, 11, 6}};
    const double err = gradient_check(p, batch);
    check("LSTM gradients match finite differences", err < 1e-4, "max relative error " + format9(err));

    const auto dist = forward_distributions(p, {1, 2, 3, 4});
    const double worst = (dist.colwise().sum().array() - 1.0).abs().maxCoeff();
    check("LSTM distributions normalise", worst < 1e-12, "max deviation " + format9(worst));
  }

  {
    const Corpus corpus = {{"a", "b", "a", "."}, {"b", "a", "."}, {"a", "a", "b", "."}};
    const auto model = train_kgram(corpus, {2, 0.1, 1}, "selftest");
    const auto& v = model.vocab;
    // Direct count: bigrams over <eos>-padded sentences.
    std::map<std::pair<std::string, std::string>, double> pair_counts;
    std::map<std::string, double> ctx_counts;
    for (const auto& s : corpus) {
      std::string prev = "<eos>";
      for (std::size_t i = 0; i <= s.size(); ++i) {
        const std::string next = i < s.size() ? s[i] : "<eos>";
        pair_counts[{prev, next}] += 1.0;
        ctx_counts[prev] += 1.0;
        prev = next;
      }
    }
    const Sentence probe = {"b", "a", "b", "."};
    const auto ts = surprisal(model, probe);
    double worst = 0.0;
    std::string prev = "<eos>";
    for (std::size_t i = 0; i < probe.size(); ++i) {
      const double p = (pair_counts[{prev, probe[i]}] + 0.1) / (ctx_counts[prev] + 0.1 * v.size());
      worst = std::max(worst, std::abs(ts.bits[i] + std::log2(p)));
      prev = probe[i];
    }
    check("k-gram surprisal equals hand counts", worst < 1e-9, "max difference " + format9(worst));
  }

  {
    Rng rng(11);
    std::vector<double> x, y;
    for (int i = 0; i < 10000; ++i) {
      x.push_back(4.0 + 2.0 * rng.normal());
      y.push_back(0.0);
    }
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 2.0 + 0.5 * (x[i] - mx) + 0.01 * rng.normal();
    const auto fit = fit_centered_ols(x, y);
    check("regression recovers planted coefficients",
          std::abs(fit.beta0 - 2.0) < 0.01 && std::abs(fit.beta1 - 0.5) < 0.01,
          "beta0 " + format9(fit.beta0) + ", beta1 " + format9(fit.beta1));
  }

  {
    LstmHyper h;
    h.nhid = 6;
    h.emb_dim = 4;
    const auto vocab = Vocabulary::from_tokens({"<unk>", "<eos>", "x", "y"});
    const auto snap = random_init(h, vocab, 3);
    const auto bytes = encode_checkpoint(snap);
    check("checkpoint round trip is bit-exact", encode_checkpoint(decode_checkpoint(bytes)) == bytes,
          std::to_string(bytes.size()) + " bytes");
  }
  return ok;
}

}  // namespace synprime
