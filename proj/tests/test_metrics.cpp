#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "synprime/error.hpp"
#include "synprime/metrics.hpp"
#include "synprime/random.hpp"

using namespace synprime;

namespace {

constexpr auto UORC = StructureId::UnreducedObjectRC;
constexpr auto RORC = StructureId::ReducedObjectRC;
constexpr auto UPRC = StructureId::UnreducedPassiveRC;
constexpr auto RPRC = StructureId::ReducedPassiveRC;
constexpr auto ASRC = StructureId::ActiveSubjectRC;
constexpr auto PSO = StructureId::CoordPSORC;
constexpr auto AS = StructureId::CoordASRC;

AdaptationMatrix filled(double value) {
  AdaptationMatrix m;
  for (auto& row : m.cells) {
    for (auto& c : row) c.mean = value;
  }
  return m;
}

void set(AdaptationMatrix& m, StructureId a, StructureId t, double v) { m.cells[index_of(a)][index_of(t)].mean = v; }

AdaptationEffect effect(std::string model, StructureId a, StructureId t, int list, int sentence, double ae) {
  return {{std::move(model), a, t, list, sentence}, ae};
}

// One zero effect in every cell not already covered, so the matrix is complete.
void pad(std::vector<AdaptationEffect>& e) {
  for (const auto a : kAllStructures) {
    for (const auto t : kAllStructures) {
      const bool covered = std::any_of(e.begin(), e.end(), [&](const AdaptationEffect& x) {
        return x.key.adapt_structure == a && x.key.test_structure == t;
      });
      if (!covered) e.push_back(effect("pad", a, t, 0, 0, 0.0));
    }
  }
}

}  // namespace

TEST_CASE("raw adaptation is the surprisal drop") {
  const std::vector<SurprisalRecord> records = {{"m", UORC, RORC, 0, 3, 10.0, 7.5}};
  const auto raw = raw_adaptation(records);
  REQUIRE(raw.size() == 1);
  CHECK(raw[0].a == 2.5);
  CHECK(raw[0].surp_pre == 10.0);
  CHECK(raw[0].key.sentence_id == 3);
  std::vector<SurprisalRecord> bad = records;
  bad[0].surp_post = std::nan("");
  CHECK_THROWS_AS(raw_adaptation(bad), DataError);
}

TEST_CASE("centered regression recovers planted coefficients") {
  Rng rng(3);
  std::vector<double> x(10000), y(10000);
  for (auto& v : x) v = 6.0 + 1.5 * rng.normal();
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 2.0 + 0.5 * (x[i] - mx) + 0.01 * rng.normal();
  const auto fit = fit_centered_ols(x, y);
  CHECK(std::abs(fit.beta0 - 2.0) < 0.01);
  CHECK(std::abs(fit.beta1 - 0.5) < 0.01);
  CHECK(fit.se_beta1 > 0.0);
  CHECK(fit.se_beta1 < 0.001);
  double resid_sum = 0, resid_x = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    resid_sum += fit.residuals[i];
    resid_x += fit.residuals[i] * (x[i] - mx);
  }
  CHECK(std::abs(resid_sum) < 1e-9);
  CHECK(std::abs(resid_x) < 1e-9);
}

TEST_CASE("constant surprisal gives a degenerate fit with slope zero") {
  const auto fit = fit_centered_ols({3.0, 3.0, 3.0}, {1.0, 2.0, 4.0});
  CHECK(fit.degenerate);
  CHECK(fit.beta1 == 0.0);
  CHECK(fit.beta0 == doctest::Approx(7.0 / 3.0));
}

TEST_CASE("effects keep the mean of raw adaptation") {
  std::vector<RawAdaptation> raw;
  Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    const double pre = 5.0 + rng.normal();
    raw.push_back({{i % 2 ? "a" : "b", UORC, RORC, 0, i}, pre, 0.3 * pre + 0.1 * rng.normal()});
  }
  const auto set = regress_out_surprisal(raw);
  CHECK(set.fits.size() == 2);
  for (const std::string model : {"a", "b"}) {
    double mean_a = 0, mean_ae = 0, dot = 0;
    int n = 0;
    const auto& fit = set.fits.at(model);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i].key.model_id != model) continue;
      mean_a += raw[i].a;
      mean_ae += set.effects[i].ae;
      dot += set.effects[i].ae * (raw[i].surp_pre - fit.surp_mean);
      ++n;
    }
    CHECK(std::abs(mean_a - mean_ae) / n < 1e-12);
    CHECK(std::abs(dot - n * 0.0) < 1e-9);
  }
  const auto per_cell = regress_out_surprisal(raw, FitScope::PerCell);
  CHECK(per_cell.fits.size() == 2);
}

TEST_CASE("matrix averages sentences, then lists, then models") {
  std::vector<AdaptationEffect> e = {
      effect("m1", UORC, RORC, 0, 0, 1.0), effect("m1", UORC, RORC, 0, 1, 3.0),  // list mean 2
      effect("m1", UORC, RORC, 1, 0, 6.0),                                       // list mean 6
      effect("m2", UORC, RORC, 0, 0, 10.0),
  };
  pad(e);
  const auto m = adaptation_matrix(e, {0, 1});
  CHECK(m(UORC, RORC) == doctest::Approx((4.0 + 10.0) / 2.0));
  CHECK(m.cells[index_of(UORC)][index_of(RORC)].n == 4);
  CHECK(m.cells[index_of(RORC)][index_of(UORC)].n == 1);
}

TEST_CASE("an empty cell is an error") {
  std::vector<AdaptationEffect> e = {effect("m", UORC, RORC, 0, 0, 1.0)};
  CHECK_THROWS_AS(adaptation_matrix(e, {0, 1}), DataError);
}

TEST_CASE("bootstrap interval of a constant cell has zero width") {
  std::vector<AdaptationEffect> e;
  for (int i = 0; i < 30; ++i) e.push_back(effect("m", ASRC, ASRC, i % 3, i, 0.7));
  for (int i = 0; i < 30; ++i) e.push_back(effect("m", ASRC, PSO, i % 3, i, 0.1 * i));
  pad(e);
  const auto m = adaptation_matrix(e, {200, 5});
  const auto& flat = m.cells[index_of(ASRC)][index_of(ASRC)];
  CHECK(flat.lo == doctest::Approx(0.7));
  CHECK(flat.hi == doctest::Approx(0.7));
  const auto& spread = m.cells[index_of(ASRC)][index_of(PSO)];
  CHECK(spread.lo < spread.mean);
  CHECK(spread.hi > spread.mean);
  // Same seed, same interval.
  const auto again = adaptation_matrix(e, {200, 5});
  CHECK(again.cells[index_of(ASRC)][index_of(PSO)].lo == spread.lo);
}

TEST_CASE("distance ratios follow hand arithmetic") {
  auto m = filled(1.0);
  // SameRC: diagonal 3 over off-diagonal RC mean 1 for every RC row.
  for (auto s : {UORC, RORC, UPRC, RPRC, ASRC}) set(m, s, s, 3.0);
  const auto same = distance_ratio(m, same_rc_class());
  REQUIRE(same.d);
  CHECK(*same.d == doctest::Approx(3.0));
  CHECK(same.rows.size() == 5);

  // Row UORC: in {RORC, UPRC, RPRC, ASRC} = 1, out {PSO, AS} = 0.5 and 0.25.
  set(m, UORC, PSO, 0.5);
  set(m, UORC, AS, 0.25);
  const auto any = distance_ratio(m, any_rc_class());
  REQUIRE(any.rows.size() == 5);
  CHECK(*any.rows[0].second == doctest::Approx(1.0 / 0.375));

  // ReductionMatch row UORC: in {UPRC} over out {RORC, RPRC}.
  set(m, UORC, UPRC, 2.0);
  set(m, UORC, RORC, 4.0);
  set(m, UORC, RPRC, 1.0);
  const auto red = distance_ratio(m, reduction_class());
  CHECK(*red.rows[0].second == doctest::Approx(2.0 / 2.5));
  CHECK(red.rows.size() == 4);
}

TEST_CASE("distance ratios are scale invariant") {
  Rng rng(4);
  AdaptationMatrix m;
  for (auto& row : m.cells) {
    for (auto& c : row) c.mean = 0.5 + rng.uniform();
  }
  AdaptationMatrix scaled = m;
  for (auto& row : scaled.cells) {
    for (auto& c : row) c.mean *= 3.7;
  }
  for (const auto& cls : {same_rc_class(), reduction_class(), any_rc_class()}) {
    CHECK(*distance_ratio(m, cls).d == doctest::Approx(*distance_ratio(scaled, cls).d).epsilon(1e-12));
  }
}

TEST_CASE("a zero out-of-class mean leaves the row undefined") {
  auto m = filled(1.0);
  set(m, UORC, PSO, 0.0);
  set(m, UORC, AS, 0.0);
  const auto d = distance_ratio(m, any_rc_class());
  CHECK_FALSE(d.rows[0].second.has_value());
  CHECK_FALSE(d.d.has_value());
  CHECK(d.rows[1].second.has_value());
}

TEST_CASE("matrices round trip through text") {
  std::vector<AdaptationEffect> e;
  Rng rng(2);
  for (auto a : kAllStructures) {
    for (auto t : kAllStructures) {
      for (int i = 0; i < 5; ++i) e.push_back(effect("m", a, t, 0, i, rng.normal()));
    }
  }
  const auto m = adaptation_matrix(e, {50, 1});
  std::ostringstream out;
  write_matrix(out, m);
  std::istringstream in(out.str());
  const auto back = read_matrix(in);
  for (auto a : kAllStructures) {
    for (auto t : kAllStructures) {
      CHECK(back(a, t) == doctest::Approx(m(a, t)).epsilon(1e-8));
      CHECK(back.cells[index_of(a)][index_of(t)].n == 5);
    }
  }
  std::istringstream truncated(out.str().substr(0, out.str().size() / 2));
  CHECK_THROWS_AS(read_matrix(truncated), DataError);
}
