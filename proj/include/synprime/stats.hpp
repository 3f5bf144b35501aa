#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace synprime {

struct OlsFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;  // HC1 sandwich standard errors
  Eigen::VectorXd residuals;
};

// Throws DataError when X is rank-deficient or has fewer rows than columns.
OlsFit ols_hc1(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct TestResult {
  std::string name;
  double beta = 0.0;
  double se = 0.0;
  double p_value = 1.0;  // (1 + #{|beta_perm| >= |beta|}) / (n_permutations + 1)
  int n_permutations = 0;
  std::uint64_t seed = 0;
  int extreme = 0;  // permutations at least as extreme as the observed estimate
};

// "p<1e-04" when no permutation was as extreme, otherwise "p = 0.0123".
std::string format_p(const TestResult& r);

struct PermutationOptions {
  int permutations = 10000;
  std::uint64_t seed = 1;
};

// One observation of a contrast-coded analysis. `codes` holds one value per
// contrast column; `list` and `corpus` are grouping covariates entered as fixed
// dummies and used as permutation strata.
struct ContrastObservation {
  double y = 0.0;
  std::vector<double> codes;
  int list = 0;
  std::string corpus;
};

// OLS of y on the contrast columns plus list and corpus dummies. p-values come
// from permuting the contrast codes within (list, corpus) strata. Throws
// DataError with fewer than two distinct code rows or a rank-deficient design.
std::vector<TestResult> fit_contrast(const std::vector<ContrastObservation>& obs,
                                     const std::vector<std::string>& contrast_names,
                                     const PermutationOptions& options = {});

// One observation of a continuous-predictor regression.
struct RegressionObservation {
  double y = 0.0;
  std::vector<double> predictors;
  int list = 0;
  std::string corpus;
};

struct RegressionSpec {
  std::vector<std::string> predictor_names;
  std::vector<bool> standardize;      // per predictor: replace x by (x - mean) / sd
  bool interaction = false;           // adds the product of the first two predictors
  bool list_dummies = true;
  bool corpus_dummies = true;
};

struct RegressionReport {
  std::vector<TestResult> results;
  std::vector<std::string> notes;  // e.g. predictors dropped for having no variance
};

// p-values by Freedman-Lane permutation of reduced-model residuals.
RegressionReport fit_regression(const std::vector<RegressionObservation>& obs,
                                const RegressionSpec& spec, const PermutationOptions& options = {});

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample Kolmogorov-Smirnov test against Uniform(0, 1), with the asymptotic
// Kolmogorov distribution and Stephens' small-sample correction.
KsResult ks_uniform(std::vector<double> values);

// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

}  // namespace synprime
