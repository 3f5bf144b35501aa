#pragma once

// Command implementations behind the `synprime` executable. Every artifact is
// written under RunConfig::output_dir:
//
//   corpora/      lists.tsv, train.txt (synthetic corpus), agreement_pairs.tsv, manifest.json
//   checkpoints/  <model id>.ckpt, manifest.json
//   records/      records.tsv
//   analysis/     matrices, distances, fits, agreement, stats, hierarchy
//   report/       heatmap and dendrogram SVGs, summary.txt

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "synprime/analysis.hpp"
#include "synprime/language_model.hpp"
#include "synprime/synthetic_corpus.hpp"
#include "synprime/templates.hpp"

namespace synprime {

struct GridPoint {
  int nhid = 100;
  std::uint64_t corpus_tokens = 100000;
};

struct RunConfig {
  std::filesystem::path lexicon = std::filesystem::path(SYNPRIME_DATA_DIR) / "lexicon.json";
  std::filesystem::path output_dir = "synprime-out";

  // Training text: "synthetic" generates corpora/train.txt; "file" reads corpus_path.
  std::string corpus_source = "synthetic";
  std::filesystem::path corpus_path;
  int corpus_slices = 1;
  SyntheticGrammar grammar;

  std::string backend = "lstm";  // "lstm" or "kgram"
  std::vector<GridPoint> grid = {GridPoint{}};
  LstmHyper lstm;  // nhid, corpus_tokens and seed are set per grid point
  bool emb_equals_nhid = true;
  KGramHyper kgram;
  bool baselines = true;

  int n_lists = 5;
  ListSizes list_sizes;
  NoiseConfig noise;
  AdaptConfig adapt;
  int agreement_pairs = 100;  // per construction

  std::uint64_t seed = 1;
  int bootstrap_resamples = 1000;
  int permutations = 10000;
  FitScope fit_scope = FitScope::PerModel;
  int workers = 1;

  // Throws DataError on out-of-range values.
  void validate() const;
};

// Parses a JSON config. Relative paths are resolved against `base_dir`. Unknown
// keys are errors.
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

// SYNPRIME_OUTPUT_DIR and SYNPRIME_WORKERS, when set, replace the config values.
void apply_environment(RunConfig& config);

struct ModelManifestEntry {
  ModelInfo info;
  std::string backend;
  std::filesystem::path checkpoint;     // relative to the checkpoints directory
  std::optional<double> heldout_bits;   // mean sentence surprisal on held-out text
};

std::vector<ModelManifestEntry> read_model_manifest(const std::filesystem::path& output_dir);

// Each command prints progress to `log` and throws DataError / NumericalError on failure.
void cmd_gen(const RunConfig& config, std::ostream& log);
void cmd_train(const RunConfig& config, std::ostream& log);
// fresh = false keeps complete cells from an existing records file.
void cmd_run(const RunConfig& config, std::ostream& log, bool fresh = false);
void cmd_analyze(const RunConfig& config, std::ostream& log);
void cmd_report(const RunConfig& config, std::ostream& log);

// Small built-in oracle checks; returns false if any fails.
bool cmd_selftest(std::ostream& log);

}  // namespace synprime
