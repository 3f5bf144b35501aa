#include "synprime/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>

#include "synprime/error.hpp"
#include "synprime/random.hpp"

namespace synprime {

OlsFit ols_hc1(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const auto n = X.rows();
  const auto p = X.cols();
  if (n != y.size()) throw DataError("design and response lengths differ");
  if (n < p) throw DataError("design has fewer observations than columns");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < p) throw DataError("rank-deficient design");
  OlsFit fit;
  fit.beta = qr.solve(y);
  fit.residuals = y - X * fit.beta;
  const Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
  const Eigen::MatrixXd meat = X.transpose() * fit.residuals.array().square().matrix().asDiagonal() * X;
  const double correction = n > p ? static_cast<double>(n) / static_cast<double>(n - p) : 1.0;
  const Eigen::MatrixXd cov = correction * xtx_inv * meat * xtx_inv;
  fit.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return fit;
}

std::string format_p(const TestResult& r) {
  char buf[64];
  if (r.extreme == 0 && r.n_permutations > 0) {
    std::snprintf(buf, sizeof(buf), "p<%.0e", 1.0 / r.n_permutations);
  } else {
    std::snprintf(buf, sizeof(buf), "p = %.4g", r.p_value);
  }
  return buf;
}

namespace {

// Dummy columns for every level but the first.
template <typename Key>
Eigen::MatrixXd dummies(const std::vector<Key>& levels) {
  std::map<Key, int> index;
  for (const auto& l : levels) index.emplace(l, 0);
  int next = -1;
  for (auto& [key, i] : index) i = next++;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(levels.size()),
                                              std::max(0, next));
  for (std::size_t r = 0; r < levels.size(); ++r) {
    const int c = index.at(levels[r]);
    if (c >= 0) out(static_cast<Eigen::Index>(r), c) = 1.0;
  }
  return out;
}

Eigen::MatrixXd hcat(const std::vector<Eigen::MatrixXd>& blocks, Eigen::Index rows) {
  Eigen::Index cols = 0;
  for (const auto& b : blocks) cols += b.cols();
  Eigen::MatrixXd out(rows, cols);
  Eigen::Index c = 0;
  for (const auto& b : blocks) {
    out.middleCols(c, b.cols()) = b;
    c += b.cols();
  }
  return out;
}

bool at_least_as_extreme(double permuted, double observed) {
  return std::abs(permuted) >= std::abs(observed) * (1.0 - 1e-12);
}

using Strata = std::vector<std::vector<Eigen::Index>>;

template <typename Obs>
Strata strata_of(const std::vector<Obs>& obs) {
  std::map<std::pair<int, std::string>, std::vector<Eigen::Index>> groups;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    groups[{obs[i].list, obs[i].corpus}].push_back(static_cast<Eigen::Index>(i));
  }
  Strata out;
  for (auto& [key, idx] : groups) out.push_back(std::move(idx));
  return out;
}

// perm[i] is the source row for row i; only rows within a stratum are exchanged.
std::vector<Eigen::Index> permutation(const Strata& strata, std::size_t n, Rng& rng) {
  std::vector<Eigen::Index> perm(n);
  for (const auto& idx : strata) {
    std::vector<Eigen::Index> shuffled = idx;
    rng.shuffle(shuffled.begin(), shuffled.end());
    for (std::size_t k = 0; k < idx.size(); ++k) perm[static_cast<std::size_t>(idx[k])] = shuffled[k];
  }
  return perm;
}

}  // namespace

std::vector<TestResult> fit_contrast(const std::vector<ContrastObservation>& obs,
                                     const std::vector<std::string>& contrast_names,
                                     const PermutationOptions& options) {
  const auto k = static_cast<Eigen::Index>(contrast_names.size());
  const auto n = static_cast<Eigen::Index>(obs.size());
  if (k == 0) throw DataError("no contrasts to fit");
  std::set<std::vector<double>> levels;
  for (const auto& o : obs) {
    if (static_cast<Eigen::Index>(o.codes.size()) != k) {
      throw DataError("observation has the wrong number of contrast codes");
    }
    levels.insert(o.codes);
  }
  if (levels.size() < 2) throw DataError("contrast needs at least two coding levels");

  Eigen::VectorXd y(n);
  Eigen::MatrixXd C(n, k);
  std::vector<int> lists;
  std::vector<std::string> corpora;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& o = obs[static_cast<std::size_t>(i)];
    y(i) = o.y;
    for (Eigen::Index j = 0; j < k; ++j) C(i, j) = o.codes[static_cast<std::size_t>(j)];
    lists.push_back(o.list);
    corpora.push_back(o.corpus);
  }
  const Eigen::MatrixXd Z = hcat({Eigen::MatrixXd::Ones(n, 1), dummies(lists), dummies(corpora)}, n);
  const Eigen::MatrixXd X = hcat({Z.leftCols(1), C, Z.rightCols(Z.cols() - 1)}, n);
  const OlsFit full = ols_hc1(X, y);

  // Frisch-Waugh-Lovell: the contrast estimates equal the regression of the
  // Z-residualized response on the Z-residualized codes. Within-stratum
  // permutations commute with that residualization, so each permutation costs O(nk).
  const Eigen::HouseholderQR<Eigen::MatrixXd> zqr(Z);
  const Eigen::VectorXd ry = y - Z * zqr.solve(y);
  const Eigen::MatrixXd R = C - Z * zqr.solve(C);
  const Eigen::MatrixXd G_inv = (R.transpose() * R).inverse();
  const Eigen::VectorXd observed = G_inv * (R.transpose() * ry);

  const Strata strata = strata_of(obs);
  std::vector<int> extreme(static_cast<std::size_t>(k), 0);
  Eigen::VectorXd cross(k);
  for (int b = 0; b < options.permutations; ++b) {
    Rng rng(derive_seed(options.seed, {static_cast<std::uint64_t>(b)}));
    const auto perm = permutation(strata, obs.size(), rng);
    cross.setZero();
    for (Eigen::Index i = 0; i < n; ++i) cross += R.row(perm[static_cast<std::size_t>(i)]).transpose() * ry(i);
    const Eigen::VectorXd beta = G_inv * cross;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (at_least_as_extreme(beta(j), observed(j))) ++extreme[static_cast<std::size_t>(j)];
    }
  }

  std::vector<TestResult> out;
  for (Eigen::Index j = 0; j < k; ++j) {
    TestResult r;
    r.name = contrast_names[static_cast<std::size_t>(j)];
    r.beta = full.beta(1 + j);
    r.se = full.se(1 + j);
    r.n_permutations = options.permutations;
    r.seed = options.seed;
    r.extreme = extreme[static_cast<std::size_t>(j)];
    r.p_value = (1.0 + r.extreme) / (options.permutations + 1.0);
    out.push_back(std::move(r));
  }
  return out;
}

RegressionReport fit_regression(const std::vector<RegressionObservation>& obs,
                                const RegressionSpec& spec, const PermutationOptions& options) {
  const auto n = static_cast<Eigen::Index>(obs.size());
  const auto p = spec.predictor_names.size();
  if (n == 0) throw DataError("regression has no observations");
  RegressionReport report;

  std::vector<Eigen::VectorXd> columns;
  std::vector<std::string> names;
  std::vector<bool> kept(p, false);
  for (std::size_t j = 0; j < p; ++j) {
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& o = obs[static_cast<std::size_t>(i)];
      if (o.predictors.size() != p) throw DataError("observation has the wrong number of predictors");
      x(i) = o.predictors[j];
    }
    const double mean = x.mean();
    const double var = n > 1 ? (x.array() - mean).square().sum() / static_cast<double>(n - 1) : 0.0;
    if (!(var > 0.0)) {
      report.notes.push_back(spec.predictor_names[j] + " has no variance and was dropped");
      continue;
    }
    if (j < spec.standardize.size() && spec.standardize[j]) x = (x.array() - mean) / std::sqrt(var);
    kept[j] = true;
    columns.push_back(x);
    names.push_back(spec.predictor_names[j]);
  }
  if (spec.interaction && p >= 2) {
    if (kept[0] && kept[1]) {
      columns.push_back(columns[0].cwiseProduct(columns[1]));
      names.push_back(spec.predictor_names[0] + ":" + spec.predictor_names[1]);
    } else {
      report.notes.push_back("interaction " + spec.predictor_names[0] + ":" + spec.predictor_names[1] +
                             " dropped with its main effect");
    }
  }
  if (columns.empty()) {
    report.notes.push_back("no predictor varies; nothing to test");
    return report;
  }

  std::vector<int> lists;
  std::vector<std::string> corpora;
  for (const auto& o : obs) {
    lists.push_back(o.list);
    corpora.push_back(o.corpus);
  }
  std::vector<Eigen::MatrixXd> blocks = {Eigen::MatrixXd::Ones(n, 1)};
  for (const auto& c : columns) blocks.push_back(c);
  if (spec.list_dummies) blocks.push_back(dummies(lists));
  if (spec.corpus_dummies) blocks.push_back(dummies(corpora));
  const Eigen::MatrixXd X = hcat(blocks, n);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = obs[static_cast<std::size_t>(i)].y;
  const OlsFit full = ols_hc1(X, y);
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> xqr(X);

  for (std::size_t j = 0; j < columns.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(1 + j);
    Eigen::MatrixXd reduced(n, X.cols() - 1);
    reduced << X.leftCols(col), X.rightCols(X.cols() - col - 1);
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rqr(reduced);
    const Eigen::VectorXd fitted = reduced * rqr.solve(y);
    const Eigen::VectorXd resid = y - fitted;

    TestResult r;
    r.name = names[j];
    r.beta = full.beta(col);
    r.se = full.se(col);
    r.n_permutations = options.permutations;
    r.seed = options.seed;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (int b = 0; b < options.permutations; ++b) {
      Rng rng(derive_seed(options.seed, {j, static_cast<std::uint64_t>(b)}));
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      rng.shuffle(order.begin(), order.end());
      Eigen::VectorXd y_star = fitted;
      for (Eigen::Index i = 0; i < n; ++i) y_star(i) += resid(order[static_cast<std::size_t>(i)]);
      const Eigen::VectorXd beta = xqr.solve(y_star);
      if (at_least_as_extreme(beta(col), r.beta)) ++r.extreme;
    }
    r.p_value = (1.0 + r.extreme) / (options.permutations + 1.0);
    report.results.push_back(std::move(r));
  }
  return report;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;  // the series converges poorly here and the value is 1 to double precision
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_uniform(std::vector<double> values) {
  if (values.empty()) throw DataError("KS test needs at least one value");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = std::clamp(values[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  const double root = std::sqrt(n);
  return {d, kolmogorov_survival((root + 0.12 + 0.11 / root) * d)};
}

}  // namespace synprime
