#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "synprime/priming.hpp"
#include "synprime/structure.hpp"

namespace synprime {

struct RecordKey {
  std::string model_id;
  StructureId adapt_structure = StructureId::UnreducedObjectRC;
  StructureId test_structure = StructureId::UnreducedObjectRC;
  int list_id = 0;
  int sentence_id = 0;
};

struct RawAdaptation {
  RecordKey key;
  double surp_pre = 0.0;
  double a = 0.0;  // surp_pre - surp_post; positive means priming
};

// Throws DataError if a record has a non-finite surprisal.
std::vector<RawAdaptation> raw_adaptation(const std::vector<SurprisalRecord>& records);

struct RegressionFit {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double se_beta1 = 0.0;  // heteroskedasticity-robust (HC1)
  double surp_mean = 0.0;
  std::vector<double> residuals;
  bool degenerate = false;  // regressor spread within rounding of constant; beta1 fixed at 0
};

// OLS of y on (x - mean(x)) with an intercept.
RegressionFit fit_centered_ols(const std::vector<double>& x, const std::vector<double>& y);

struct AdaptationEffect {
  RecordKey key;
  double ae = 0.0;
};

enum class FitScope { PerModel, PerCell };

struct EffectSet {
  std::vector<AdaptationEffect> effects;          // same order as the input
  std::map<std::string, RegressionFit> fits;      // keyed by model id, or model/adapt/test
  std::vector<std::string> warnings;              // degenerate fits
};

// AE = a - beta1 * (surp_pre - surp_mean), with one fit per model (or per
// model and cell when scope is PerCell).
EffectSet regress_out_surprisal(const std::vector<RawAdaptation>& raw,
                                FitScope scope = FitScope::PerModel);

struct MatrixCell {
  double mean = 0.0;
  double lo = 0.0;  // bootstrap 95% interval
  double hi = 0.0;
  std::size_t n = 0;
};

// cells[adapt][test]
struct AdaptationMatrix {
  std::array<std::array<MatrixCell, kNumStructures>, kNumStructures> cells{};

  double operator()(StructureId adapt, StructureId test) const {
    return cells[index_of(adapt)][index_of(test)].mean;
  }
};

struct BootstrapOptions {
  int resamples = 1000;
  std::uint64_t seed = 1;
};

// Hierarchical mean: sentences within list, lists within model, then models.
// The bootstrap resamples sentences within each (model, list) group.
AdaptationMatrix adaptation_matrix(const std::vector<AdaptationEffect>& effects,
                                   const BootstrapOptions& options = {});

// Same averaging without intervals, for effects already filtered by the caller.
double hierarchical_mean(const std::vector<const AdaptationEffect*>& effects);

// Rows of a class and, per row, which test columns count as in-class and out-of-class.
struct StructureClass {
  std::string name;
  std::vector<StructureId> rows;
  std::function<bool(StructureId row, StructureId col)> in_class;
  std::function<bool(StructureId row, StructureId col)> out_class;
};

// RC rows; in-class is the diagonal, out-of-class the other RC columns.
StructureClass same_rc_class();
// Object and passive RC rows; in-class is the other RC with the same reduction,
// out-of-class the two with the other reduction.
StructureClass reduction_class();
// RC rows; in-class is the other RC columns, out-of-class the coordination columns.
StructureClass any_rc_class();
// any_rc_class restricted to the given rows.
StructureClass any_rc_class(std::vector<StructureId> rows);

struct DistanceResult {
  std::string class_name;
  std::vector<std::pair<StructureId, std::optional<double>>> rows;  // nullopt: undefined row
  std::optional<double> d;  // mean over defined rows; nullopt if any row is undefined
};

DistanceResult distance_ratio(const AdaptationMatrix& matrix, const StructureClass& cls);

inline constexpr std::string_view kMatrixSchema = "#synprime-matrix\t1";

// One line per cell: adapt, test, mean, lo, hi, n (9 significant digits).
void write_matrix(std::ostream& out, const AdaptationMatrix& matrix);
// Throws DataError on a schema mismatch or a missing cell.
AdaptationMatrix read_matrix(std::istream& in);

}  // namespace synprime
