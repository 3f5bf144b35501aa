#include <doctest.h>

#include <cmath>
#include <numeric>

#include "synprime/error.hpp"
#include "synprime/random.hpp"
#include "synprime/stats.hpp"

using namespace synprime;

TEST_CASE("OLS coefficients match the normal equations") {
  Rng rng(1);
  Eigen::MatrixXd X(50, 3);
  Eigen::VectorXd y(50);
  for (int i = 0; i < 50; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = rng.normal();
    X(i, 2) = rng.uniform();
    y(i) = 1.0 + 2.0 * X(i, 1) - X(i, 2) + 0.1 * rng.normal();
  }
  const auto fit = ols_hc1(X, y);
  const Eigen::VectorXd expected = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  CHECK((fit.beta - expected).cwiseAbs().maxCoeff() < 1e-10);
  // HC1 by its definition.
  const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(3, 3);
  for (int i = 0; i < 50; ++i) meat += fit.residuals(i) * fit.residuals(i) * X.row(i).transpose() * X.row(i);
  const Eigen::MatrixXd cov = bread * meat * bread * (50.0 / 47.0);
  for (int j = 0; j < 3; ++j) CHECK(fit.se(j) == doctest::Approx(std::sqrt(cov(j, j))).epsilon(1e-10));
}

TEST_CASE("rank-deficient designs are rejected") {
  Eigen::MatrixXd X(4, 2);
  X << 1, 2, 1, 2, 1, 2, 1, 2;
  CHECK_THROWS_AS(ols_hc1(X, Eigen::VectorXd::Ones(4)), DataError);
}

TEST_CASE("a +/-1 coded two-group slope is half the mean difference") {
  Rng rng(6);
  std::vector<ContrastObservation> obs;
  double sum_a = 0, sum_b = 0;
  int n_a = 0, n_b = 0;
  for (int i = 0; i < 37; ++i) {
    const bool a = i % 3 != 0;
    const double y = rng.normal() + (a ? 1.0 : 0.0);
    obs.push_back({y, {a ? 1.0 : -1.0}, 0, "c"});
    (a ? sum_a : sum_b) += y;
    (a ? n_a : n_b) += 1;
  }
  const auto r = fit_contrast(obs, {"group"}, {200, 1});
  CHECK(r[0].beta == doctest::Approx((sum_a / n_a - sum_b / n_b) / 2.0).epsilon(1e-12));
}

TEST_CASE("a strong contrast gets a small permutation p-value") {
  Rng rng(2);
  std::vector<ContrastObservation> obs;
  for (int list = 0; list < 3; ++list) {
    for (int i = 0; i < 40; ++i) {
      const double code = i % 2 ? 1.0 : -1.0;
      obs.push_back({list * 5.0 + 0.8 * code + rng.normal(), {code}, list, "c"});
    }
  }
  const auto r = fit_contrast(obs, {"effect"}, {999, 4});
  CHECK(r[0].beta == doctest::Approx(0.8).epsilon(0.25));
  CHECK(r[0].extreme == 0);
  CHECK(r[0].p_value == doctest::Approx(1.0 / 1000.0));
  CHECK(format_p(r[0]) == "p<1e-03");
  // Same seed, same p-value.
  CHECK(fit_contrast(obs, {"effect"}, {999, 4})[0].extreme == r[0].extreme);
}

TEST_CASE("null permutation p-values look uniform") {
  std::vector<double> ps;
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng(derive_seed(77, {static_cast<std::uint64_t>(trial)}));
    std::vector<ContrastObservation> obs;
    for (int i = 0; i < 30; ++i) obs.push_back({rng.normal(), {i % 2 ? 1.0 : -1.0}, i % 3, "c"});
    ps.push_back(fit_contrast(obs, {"null"}, {199, static_cast<std::uint64_t>(trial)})[0].p_value);
  }
  CHECK(ks_uniform(ps).p_value > 0.01);
}

TEST_CASE("continuous regression recovers slopes and reports dropped predictors") {
  Rng rng(12);
  std::vector<RegressionObservation> obs;
  for (int i = 0; i < 200; ++i) {
    const double a = rng.normal(), b = rng.normal();
    obs.push_back({0.5 + 1.5 * a - 0.3 * b + 0.05 * rng.normal(), {a, b, 4.0}, i % 4, "c"});
  }
  RegressionSpec spec;
  spec.predictor_names = {"a", "b", "constant"};
  spec.standardize = {false, false, false};
  const auto report = fit_regression(obs, spec, {199, 3});
  REQUIRE(report.results.size() >= 2);
  CHECK(report.results[0].name == "a");
  CHECK(report.results[0].beta == doctest::Approx(1.5).epsilon(0.02));
  CHECK(report.results[1].beta == doctest::Approx(-0.3).epsilon(0.1));
  CHECK(report.results[0].extreme == 0);
  CHECK_FALSE(report.notes.empty());
}

TEST_CASE("Kolmogorov distribution and KS test") {
  CHECK(kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(0.01));
  CHECK(kolmogorov_survival(1.6276) == doctest::Approx(0.01).epsilon(0.02));
  CHECK(kolmogorov_survival(0.0) == 1.0);

  Rng rng(10);
  std::vector<double> u(500), skewed(500);
  for (auto& v : u) v = rng.uniform();
  for (auto& v : skewed) v = std::pow(rng.uniform(), 2.0);
  CHECK(ks_uniform(u).p_value > 0.01);
  CHECK(ks_uniform(skewed).p_value < 1e-6);

  // One point at 0.5: D = 0.5 exactly.
  CHECK(ks_uniform({0.5}).statistic == doctest::Approx(0.5));
}
