#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "synprime/error.hpp"
#include "synprime/lexicon.hpp"
#include "synprime/priming.hpp"
#include "synprime/synthetic_corpus.hpp"

using namespace synprime;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  std::vector<StimulusList> lists;
  std::shared_ptr<const ModelSnapshot> model;

  explicit Fixture(int n_lists = 1) {
    const auto [lex, compat] = load_lexicon(fs::path(SYNPRIME_DATA_DIR) / "lexicon.json");
    NoiseConfig noise;
    noise.rng_seed = 12;
    lists = to_stimuli(generate_lists(lex, compat, n_lists, noise));
    SyntheticCorpusConfig sc;
    sc.target_tokens = 20000;
    const auto corpus = generate_synthetic_corpus(lex, compat, sc);
    model = std::make_shared<const ModelSnapshot>(train_kgram(corpus, {2, 0.1, 1}, "synthetic"));
  }

  ExperimentPlan plan(const fs::path& output = {}) const {
    ExperimentPlan p;
    p.models = {{"kg", {}, model}};
    p.lists = lists;
    p.output = output;
    return p;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("one model and one list give 7 x 7 x 50 records") {
  const Fixture fx;
  const auto result = run_grid(fx.plan());
  CHECK(result.records.size() == 2450);
  CHECK(result.cells_computed == 7);
  CHECK(result.excluded.empty());
  // Pre-adaptation surprisal does not depend on the adaptation structure.
  for (const auto& r : result.records) {
    if (r.adapt_structure != StructureId::UnreducedObjectRC) continue;
    for (const auto& q : result.records) {
      if (q.test_structure == r.test_structure && q.sentence_id == r.sentence_id) {
        CHECK(q.surp_pre == r.surp_pre);
      }
    }
    break;
  }
}

TEST_CASE("parallel and serial runs agree") {
  Fixture fx(2);
  auto serial = fx.plan();
  auto parallel = fx.plan();
  parallel.workers = 3;
  CHECK(run_grid(serial).records == run_grid(parallel).records);
}

TEST_CASE("records round trip through text") {
  const Fixture fx;
  const auto records = run_grid(fx.plan()).records;
  std::ostringstream out;
  write_records(out, records);
  std::istringstream in(out.str());
  const auto back = read_records(in);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].model_id == records[i].model_id);
    CHECK(back[i].surp_pre == doctest::Approx(records[i].surp_pre).epsilon(1e-8));
  }
  std::istringstream wrong("#synprime-records\t9\n");
  CHECK_THROWS_AS(read_records(wrong), DataError);
  std::istringstream bad(std::string(kRecordsSchema) +
                         "\nmodel_id\tadapt_structure\ttest_structure\tlist_id\tsentence_id\tsurp_pre\tsurp_post\n"
                         "m\tUORC\tUORC\t0\t1\tx\t2\n");
  CHECK_THROWS_WITH_AS(read_records(bad), doctest::Contains("line 3"), DataError);
}

TEST_CASE("resuming a complete file computes nothing") {
  const Fixture fx;
  const fs::path dir = fs::path(SYNPRIME_TEST_TMP) / "priming";
  fs::create_directories(dir);
  const auto path = dir / "complete.tsv";
  fs::remove(path);
  run_grid(fx.plan(path));
  const auto before = slurp(path);
  const auto again = resume_grid(fx.plan(path));
  CHECK(again.cells_computed == 0);
  CHECK(again.records.size() == 2450);
  CHECK(slurp(path) == before);
}

TEST_CASE("resuming a truncated file redoes only the damaged cells") {
  const Fixture fx;
  const fs::path dir = fs::path(SYNPRIME_TEST_TMP) / "priming";
  fs::create_directories(dir);
  const auto path = dir / "partial.tsv";
  fs::remove(path);
  run_grid(fx.plan(path));
  const auto full = slurp(path);

  // Keep the header and the first 1000 records: two complete cells and part of a third.
  std::istringstream in(full);
  std::ostringstream cut;
  std::string line;
  for (int i = 0; i < 1002 && std::getline(in, line); ++i) cut << line << '\n';
  std::ofstream(path) << cut.str();

  const auto resumed = resume_grid(fx.plan(path));
  CHECK(resumed.cells_computed == 5);
  CHECK(slurp(path) == full);
}

TEST_CASE("resume refuses records from an unknown model") {
  const Fixture fx;
  const fs::path path = fs::path(SYNPRIME_TEST_TMP) / "priming" / "foreign.tsv";
  fs::create_directories(path.parent_path());
  SurprisalRecord r;
  r.model_id = "someone-else";
  write_records_file(path, {r});
  CHECK_THROWS_AS(resume_grid(fx.plan(path)), DataError);
}

TEST_CASE("adapting with zero learning rate leaves surprisal unchanged") {
  const Fixture fx;
  auto plan = fx.plan();
  plan.adapt.learning_rate = 0.0;
  for (const auto& r : run_grid(plan).records) CHECK(r.surp_pre == r.surp_post);
}
