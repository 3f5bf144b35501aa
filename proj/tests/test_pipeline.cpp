#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "synprime/checkpoint.hpp"
#include "synprime/error.hpp"
#include "synprime/hierarchy.hpp"
#include "synprime/pipeline.hpp"
#include "synprime/svg.hpp"

using namespace synprime;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::path(SYNPRIME_TEST_TMP) / "pipeline" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig kgram_config(const fs::path& out) {
  RunConfig c;
  c.output_dir = out;
  c.backend = "kgram";
  c.grid = {{100, 5000}};
  c.corpus_slices = 2;
  c.n_lists = 1;
  c.list_sizes = {5, 6};
  c.agreement_pairs = 4;
  c.bootstrap_resamples = 50;
  c.permutations = 49;
  c.kgram = {2, 0.1, 1};
  return c;
}

}  // namespace

TEST_CASE("config files parse with defaults and reject unknown keys") {
  const auto c = parse_config(R"({"schema": "synprime-config/1", "output_dir": "out",
      "grid": [{"nhid": 20, "corpus_tokens": 3000}], "lstm": {"epochs": 2},
      "adapt": {"learning_rate": 1.5}, "n_lists": 2, "fit_scope": "cell"})",
                              "/base");
  CHECK(c.output_dir == fs::path("/base/out"));
  CHECK(c.grid.size() == 1);
  CHECK(c.grid[0].nhid == 20);
  CHECK(c.lstm.epochs == 2);
  CHECK(c.emb_equals_nhid);
  CHECK(c.adapt.learning_rate == 1.5);
  CHECK(c.n_lists == 2);
  CHECK(c.fit_scope == FitScope::PerCell);
  CHECK(c.list_sizes.adaptation == 20);

  CHECK_THROWS_WITH_AS(parse_config(R"({"n_list": 2})", "."), doctest::Contains("n_list"), DataError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"lstm": {"hidden": 2}})", "."), doctest::Contains("lstm.hidden"),
                       DataError);
  CHECK_THROWS_AS(parse_config(R"({"grid": []})", "."), DataError);
  CHECK_THROWS_AS(parse_config(R"({"schema": "synprime-config/2"})", "."), DataError);
  CHECK_THROWS_AS(parse_config("{", "."), DataError);
  CHECK_THROWS_AS(parse_config(R"({"backend": "transformer"})", "."), DataError);
}

TEST_CASE("environment overrides output directory and workers") {
  RunConfig c;
  setenv("SYNPRIME_OUTPUT_DIR", "/tmp/elsewhere", 1);
  setenv("SYNPRIME_WORKERS", "3", 1);
  apply_environment(c);
  CHECK(c.output_dir == fs::path("/tmp/elsewhere"));
  CHECK(c.workers == 3);
  setenv("SYNPRIME_WORKERS", "many", 1);
  CHECK_THROWS_AS(apply_environment(c), DataError);
  unsetenv("SYNPRIME_OUTPUT_DIR");
  unsetenv("SYNPRIME_WORKERS");
}

TEST_CASE("gen writes default-sized lists and is reproducible") {
  RunConfig c;
  c.output_dir = scratch("gen-a");
  c.grid = {{10, 2000}};
  std::ostringstream log;
  cmd_gen(c, log);
  std::ifstream in(c.output_dir / "corpora" / "lists.tsv");
  const auto rows = read_lists(in);
  CHECK(rows.size() == 5 * 7 * (20 + 50));

  RunConfig again = c;
  again.output_dir = scratch("gen-b");
  cmd_gen(again, log);
  for (const auto* f : {"lists.tsv", "train.txt", "agreement_pairs.tsv", "manifest.json"}) {
    CHECK_MESSAGE(slurp(c.output_dir / "corpora" / f) == slurp(again.output_dir / "corpora" / f), f);
  }

  c.n_lists = 1;
  c.output_dir = scratch("gen-one");
  cmd_gen(c, log);
  std::ifstream one(c.output_dir / "corpora" / "lists.tsv");
  CHECK(read_lists(one).size() == 7 * 70);
}

TEST_CASE("train builds one model per slice plus a baseline") {
  RunConfig c;
  c.output_dir = scratch("train");
  c.grid = {{100, 50000}};
  c.corpus_slices = 2;
  c.lstm.epochs = 0;
  std::ostringstream log;
  cmd_gen(c, log);
  cmd_train(c, log);
  const auto manifest = read_model_manifest(c.output_dir);
  REQUIRE(manifest.size() == 3);
  int trained = 0, baselines = 0;
  for (const auto& m : manifest) (m.info.baseline ? baselines : trained) += 1;
  CHECK(trained == 2);
  CHECK(baselines == 1);

  // Zero epochs: the trained checkpoints are their initialisation.
  const auto snap = load_checkpoint(c.output_dir / "checkpoints" / manifest[0].checkpoint);
  const auto init = random_init(snap.hyper, snap.vocab, snap.hyper.seed);
  CHECK(snap.lstm().embedding == init.lstm().embedding);
  CHECK(snap.lstm().layers[1].recurrent_weights == init.lstm().layers[1].recurrent_weights);
  CHECK(snap.hyper.nhid == 100);
  CHECK(snap.hyper.corpus_tokens == 50000);

  // Held-out surprisal in the manifest matches a fresh evaluation.
  const auto corpus = read_corpus_file(c.output_dir / "corpora" / "train.txt");
  const auto slices = corpus_slices(corpus, 2, 50000);
  const std::size_t used = slices[0].size() + slices[1].size();
  const Corpus heldout(corpus.begin() + used, corpus.begin() + std::min(corpus.size(), used + 2000));
  for (const auto& m : manifest) {
    REQUIRE(m.heldout_bits.has_value());
    const auto s = load_checkpoint(c.output_dir / "checkpoints" / m.checkpoint);
    CHECK(*m.heldout_bits == doctest::Approx(corpus_mean_surprisal(s, heldout)).epsilon(1e-12));
  }
}

TEST_CASE("analyze refuses an empty records file") {
  auto c = kgram_config(scratch("empty"));
  std::ostringstream log;
  cmd_gen(c, log);
  cmd_train(c, log);
  write_records_file(c.output_dir / "records" / "records.tsv", {});
  CHECK_THROWS_WITH_AS(cmd_analyze(c, log), doctest::Contains("no records"), DataError);
}

TEST_CASE("missing upstream artifacts are named") {
  auto c = kgram_config(scratch("missing"));
  std::ostringstream log;
  CHECK_THROWS_WITH_AS(cmd_train(c, log), doctest::Contains("train.txt"), DataError);
  CHECK_THROWS_WITH_AS(cmd_run(c, log), doctest::Contains("lists.tsv"), DataError);
  CHECK_THROWS_AS(cmd_report(c, log), DataError);
}

TEST_CASE("k-gram pipeline runs end to end and reruns identically") {
  std::map<std::string, std::string> first;
  for (const std::string name : {"e2e-a", "e2e-b"}) {
    auto c = kgram_config(scratch(name));
    std::ostringstream log;
    cmd_gen(c, log);
    cmd_train(c, log);
    cmd_run(c, log);
    cmd_analyze(c, log);
    cmd_report(c, log);
    const auto manifest = read_model_manifest(c.output_dir);
    CHECK(manifest.size() == 3);
    const auto records = read_records_file(c.output_dir / "records" / "records.tsv");
    CHECK(records.size() == 3 * 7 * 7 * 6);
    for (const auto& entry : fs::recursive_directory_iterator(c.output_dir)) {
      if (!entry.is_regular_file()) continue;
      const auto rel = fs::relative(entry.path(), c.output_dir).string();
      if (first.empty() || !first.contains(rel)) {
        if (name == "e2e-a") first[rel] = slurp(entry.path());
        else FAIL_CHECK("unexpected file " << rel);
      } else {
        CHECK_MESSAGE(first[rel] == slurp(entry.path()), rel);
      }
    }
  }
  for (const auto* f : {"analysis/matrix_trained.tsv", "analysis/matrix_baseline.tsv", "analysis/stats.tsv",
                        "analysis/distances.tsv", "analysis/agreement.tsv", "report/heatmap_trained.svg",
                        "report/dendrogram.svg", "report/summary.txt"}) {
    CHECK_MESSAGE(first.contains(f), f);
  }
}

TEST_CASE("a text file can stand in for the synthetic corpus") {
  const auto dir = scratch("file-corpus");
  {
    std::ofstream text(dir / "text.txt");
    for (int i = 0; i < 300; ++i) text << "the dog " << (i % 3 ? "ran" : "sat") << " home .\n";
  }
  RunConfig c = kgram_config(dir / "out");
  c.corpus_source = "file";
  c.corpus_path = dir / "text.txt";
  c.grid = {{100, 500}};
  std::ostringstream log;
  cmd_gen(c, log);
  CHECK_FALSE(fs::exists(dir / "out" / "corpora" / "train.txt"));
  cmd_train(c, log);
  const auto models = read_model_manifest(c.output_dir);
  CHECK(models.size() == 3);
  for (const auto& m : models) CHECK(m.heldout_bits.has_value());

  c.grid = {{100, 1000}};
  CHECK_THROWS_WITH_AS(cmd_train(c, log), doctest::Contains("too few tokens"), DataError);
  c.corpus_path = dir / "absent.txt";
  CHECK_THROWS_AS(cmd_train(c, log), DataError);
}

TEST_CASE("a kgram grid may not repeat a corpus size") {
  RunConfig c = kgram_config("unused");
  c.grid = {{100, 5000}, {200, 5000}};
  CHECK_THROWS_AS(c.validate(), DataError);
  c.backend = "lstm";
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("heatmap of a flat matrix uses one colour and one legend value") {
  AdaptationMatrix m;
  for (auto& row : m.cells) {
    for (auto& c : row) c.mean = 0.25;
  }
  const auto svg = heatmap_svg(m, "flat");
  std::set<std::string> fills;
  const std::regex fill_re("<rect[^>]*fill=\"(#[0-9a-f]{6})\"");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), fill_re); it != std::sregex_iterator(); ++it) {
    fills.insert((*it)[1]);
  }
  CHECK(fills.size() == 1);
  CHECK(svg.find("0.25") != std::string::npos);
  CHECK(heatmap_svg(m, "flat") == svg);
  CHECK_FALSE(dendrogram_svg(build_hierarchy(m), "flat").empty());
}

TEST_CASE("selftest passes") {
  std::ostringstream log;
  CHECK(cmd_selftest(log));
  CHECK(log.str().find("FAIL") == std::string::npos);
}
