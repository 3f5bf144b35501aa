#include <doctest.h>

#include <cmath>
#include <map>

#include "synprime/error.hpp"
#include "synprime/kgram.hpp"
#include "synprime/language_model.hpp"

using namespace synprime;

TEST_CASE("probabilities follow add-alpha counts") {
  KGramModel m(2, 0.5, 4, 1);
  const std::vector<int> s = {2, 3, 2};
  m.add_sentence(s);
  const std::vector<int> eos = {1}, two = {2}, three = {3};
  CHECK(m.count(eos, 2) == 1.0);
  CHECK(m.count(two, 3) == 1.0);
  CHECK(m.count(two, 1) == 1.0);
  CHECK(m.context_total(two) == 2.0);
  CHECK(m.probability(two, 3) == doctest::Approx((1.0 + 0.5) / (2.0 + 0.5 * 4)));
  CHECK(m.probability(three, 0) == doctest::Approx(0.5 / (1.0 + 2.0)));
  const auto d = m.distribution(two);
  double total = 0;
  for (double p : d) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("trigram contexts are padded with eos") {
  KGramModel m(3, 1.0, 5, 1);
  const std::vector<int> s = {2, 3};
  m.add_sentence(s);
  const std::vector<int> pad = {1, 1}, first = {1, 2}, both = {2, 3};
  CHECK(m.count(pad, 2) == 1.0);
  CHECK(m.count(first, 3) == 1.0);
  CHECK(m.count(both, 1) == 1.0);
  CHECK(m.context_at(s, 0) == KGramModel::Context{1, 1});
}

TEST_CASE("totals do not depend on insertion order") {
  KGramModel a(2, 0.1, 6, 1), b(2, 0.1, 6, 1);
  const std::vector<std::vector<int>> sentences = {{2, 3, 4}, {5, 2}, {3, 3, 3, 2}};
  for (const auto& s : sentences) a.add_sentence(s, 0.1);
  for (auto it = sentences.rbegin(); it != sentences.rend(); ++it) b.add_sentence(*it, 0.1);
  CHECK(a == b);
}

TEST_CASE("adaptation adds exactly the observed counts") {
  const Corpus corpus = {{"a", "b", "."}, {"b", "a", "."}, {"a", "a", "."}};
  const auto base = train_kgram(corpus, {2, 0.1, 1}, "c");
  AdaptConfig cfg;
  cfg.count_increment = 2.0;
  const std::vector<Sentence> set = {{"a", "b", "."}};
  const auto adapted = adapt(base, set, cfg, "s");
  const auto& v = base.vocab;
  const std::vector<int> eos = {v.eos_id()}, a = {v.id("a")}, b = {v.id("b")}, dot = {v.id(".")};
  CHECK(adapted.kgram_model().count(eos, v.id("a")) == base.kgram_model().count(eos, v.id("a")) + 2.0);
  CHECK(adapted.kgram_model().count(a, v.id("b")) == base.kgram_model().count(a, v.id("b")) + 2.0);
  CHECK(adapted.kgram_model().count(b, v.id(".")) == base.kgram_model().count(b, v.id(".")) + 2.0);
  CHECK(adapted.kgram_model().count(dot, v.eos_id()) == base.kgram_model().count(dot, v.eos_id()) + 2.0);
  CHECK(adapted.kgram_model().count(b, v.id("a")) == base.kgram_model().count(b, v.id("a")));

  cfg.learning_rate = 0.0;
  CHECK(adapt(base, set, cfg, "s").kgram_model() == base.kgram_model());
}

TEST_CASE("empty k-gram model is uniform") {
  const auto vocab = Vocabulary::from_tokens({"<unk>", "<eos>", "x", "y"});
  const auto m = empty_kgram({2, 0.1, 1}, vocab);
  const Sentence s = {"x", "y"};
  for (double b : surprisal(m, s).bits) CHECK(b == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("invalid k-gram settings are rejected") {
  CHECK_THROWS_AS(KGramModel(0, 0.1, 4, 1), DataError);
  CHECK_THROWS_AS(KGramModel(2, 0.0, 4, 1), DataError);
  KGramModel m(2, 0.1, 4, 1);
  const std::vector<int> bad = {7};
  CHECK_THROWS_AS(m.add_sentence(bad), DataError);
}
