#include "synprime/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "synprime/error.hpp"
#include "synprime/random.hpp"

namespace synprime {

std::vector<RawAdaptation> raw_adaptation(const std::vector<SurprisalRecord>& records) {
  std::vector<RawAdaptation> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (!std::isfinite(r.surp_pre) || !std::isfinite(r.surp_post)) {
      throw DataError("record for model " + r.model_id + ", list " + std::to_string(r.list_id) +
                      ", sentence " + std::to_string(r.sentence_id) +
                      " lacks a finite pre/post surprisal pair");
    }
    out.push_back({{r.model_id, r.adapt_structure, r.test_structure, r.list_id, r.sentence_id},
                   r.surp_pre,
                   r.surp_pre - r.surp_post});
  }
  return out;
}

RegressionFit fit_centered_ols(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DataError("regressor and response lengths differ");
  if (x.empty()) throw DataError("cannot fit a regression to no observations");
  const auto n = static_cast<double>(x.size());
  RegressionFit fit;
  fit.surp_mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / n;

  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xc = x[i] - fit.surp_mean;
    sxx += xc * xc;
    sxy += xc * (y[i] - y_mean);
  }
  // Sentence means of a uniform model differ only by rounding; a spread that
  // small carries no signal and would give an arbitrary slope.
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  fit.degenerate = !(sxx > 0.0) || *hi - *lo <= 1e-10 * std::max(1.0, std::abs(fit.surp_mean));
  fit.beta0 = y_mean;
  fit.beta1 = fit.degenerate ? 0.0 : sxy / sxx;
  fit.residuals.resize(x.size());
  double meat = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xc = x[i] - fit.surp_mean;
    fit.residuals[i] = y[i] - fit.beta0 - fit.beta1 * xc;
    meat += xc * xc * fit.residuals[i] * fit.residuals[i];
  }
  if (!fit.degenerate && x.size() > 2) {
    fit.se_beta1 = std::sqrt(n / (n - 2.0) * meat) / sxx;
  }
  return fit;
}

EffectSet regress_out_surprisal(const std::vector<RawAdaptation>& raw, FitScope scope) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& k = raw[i].key;
    std::string g = k.model_id;
    if (scope == FitScope::PerCell) {
      g += "/" + std::string(name(k.adapt_structure)) + "/" + std::string(name(k.test_structure));
    }
    groups[g].push_back(i);
  }
  EffectSet out;
  out.effects.resize(raw.size());
  for (const auto& [g, idx] : groups) {
    std::vector<double> x, y;
    for (const auto i : idx) {
      x.push_back(raw[i].surp_pre);
      y.push_back(raw[i].a);
    }
    RegressionFit fit = fit_centered_ols(x, y);
    if (fit.degenerate) {
      out.warnings.push_back("regression for " + g +
                             " is degenerate (all pre-adaptation surprisals equal); AE = A");
    }
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const auto& r = raw[idx[j]];
      out.effects[idx[j]] = {r.key, r.a - fit.beta1 * (r.surp_pre - fit.surp_mean)};
    }
    out.fits.emplace(g, std::move(fit));
  }
  return out;
}

namespace {

using Groups = std::map<std::string, std::map<int, std::vector<double>>>;  // model -> list -> values

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double group_mean(const Groups& groups) {
  double models = 0.0;
  for (const auto& [m, lists] : groups) {
    double sum = 0.0;
    for (const auto& [l, values] : lists) sum += mean_of(values);
    models += sum / static_cast<double>(lists.size());
  }
  return models / static_cast<double>(groups.size());
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

double hierarchical_mean(const std::vector<const AdaptationEffect*>& effects) {
  if (effects.empty()) throw DataError("cannot average an empty set of effects");
  Groups groups;
  for (const auto* e : effects) groups[e->key.model_id][e->key.list_id].push_back(e->ae);
  return group_mean(groups);
}

AdaptationMatrix adaptation_matrix(const std::vector<AdaptationEffect>& effects,
                                   const BootstrapOptions& options) {
  std::array<std::array<Groups, kNumStructures>, kNumStructures> cells;
  for (const auto& e : effects) {
    cells[index_of(e.key.adapt_structure)][index_of(e.key.test_structure)][e.key.model_id]
         [e.key.list_id]
             .push_back(e.ae);
  }
  AdaptationMatrix m;
  for (const auto a : kAllStructures) {
    for (const auto t : kAllStructures) {
      const Groups& g = cells[index_of(a)][index_of(t)];
      if (g.empty()) {
        throw DataError("adaptation matrix cell (" + std::string(name(a)) + ", " +
                        std::string(name(t)) + ") is empty");
      }
      auto& cell = m.cells[index_of(a)][index_of(t)];
      cell.mean = group_mean(g);
      for (const auto& [model, lists] : g) {
        for (const auto& [l, v] : lists) cell.n += v.size();
      }
      cell.lo = cell.hi = cell.mean;
      if (options.resamples <= 0) continue;

      Rng rng(derive_seed(options.seed, {index_of(a), index_of(t)}));
      std::vector<double> stats;
      stats.reserve(static_cast<std::size_t>(options.resamples));
      Groups sample = g;
      for (int b = 0; b < options.resamples; ++b) {
        for (auto& [model, lists] : sample) {
          for (auto& [l, values] : lists) {
            const auto& source = g.at(model).at(l);
            for (auto& v : values) v = source[rng.index(source.size())];
          }
        }
        stats.push_back(group_mean(sample));
      }
      cell.lo = std::min(cell.mean, quantile(stats, 0.025));
      cell.hi = std::max(cell.mean, quantile(stats, 0.975));
    }
  }
  return m;
}

StructureClass same_rc_class() {
  StructureClass c;
  c.name = "SameRC";
  for (const auto s : kAllStructures) {
    if (is_relative_clause(s)) c.rows.push_back(s);
  }
  c.in_class = [](StructureId r, StructureId col) { return col == r; };
  c.out_class = [](StructureId r, StructureId col) { return col != r && is_relative_clause(col); };
  return c;
}

StructureClass reduction_class() {
  StructureClass c;
  c.name = "ReductionMatch";
  c.rows = {StructureId::UnreducedObjectRC, StructureId::ReducedObjectRC,
            StructureId::UnreducedPassiveRC, StructureId::ReducedPassiveRC};
  const auto member = [](StructureId s) { return is_object_rc(s) || is_passive(s); };
  c.in_class = [member](StructureId r, StructureId col) {
    return col != r && member(col) && is_reduced(col) == is_reduced(r);
  };
  c.out_class = [member](StructureId r, StructureId col) {
    return member(col) && is_reduced(col) != is_reduced(r);
  };
  return c;
}

StructureClass any_rc_class(std::vector<StructureId> rows) {
  StructureClass c;
  c.name = "AnyRC";
  c.rows = std::move(rows);
  c.in_class = [](StructureId r, StructureId col) { return col != r && is_relative_clause(col); };
  c.out_class = [](StructureId, StructureId col) { return is_coordination(col); };
  return c;
}

StructureClass any_rc_class() {
  std::vector<StructureId> rows;
  for (const auto s : kAllStructures) {
    if (is_relative_clause(s)) rows.push_back(s);
  }
  return any_rc_class(std::move(rows));
}

DistanceResult distance_ratio(const AdaptationMatrix& matrix, const StructureClass& cls) {
  DistanceResult out;
  out.class_name = cls.name;
  double sum = 0.0;
  bool all_defined = !cls.rows.empty();
  for (const auto row : cls.rows) {
    double in = 0.0, outside = 0.0;
    int n_in = 0, n_out = 0;
    for (const auto col : kAllStructures) {
      if (cls.in_class(row, col)) {
        in += matrix(row, col);
        ++n_in;
      } else if (cls.out_class(row, col)) {
        outside += matrix(row, col);
        ++n_out;
      }
    }
    if (n_in == 0 || n_out == 0) {
      throw DataError("class " + cls.name + " row " + std::string(name(row)) +
                      " needs in-class and out-of-class columns");
    }
    const double out_mean = outside / n_out;
    if (out_mean == 0.0) {
      out.rows.emplace_back(row, std::nullopt);
      all_defined = false;
      continue;
    }
    const double ratio = (in / n_in) / out_mean;
    out.rows.emplace_back(row, ratio);
    sum += ratio;
  }
  if (all_defined) out.d = sum / static_cast<double>(cls.rows.size());
  return out;
}

}  // namespace synprime

namespace synprime {

void write_matrix(std::ostream& out, const AdaptationMatrix& matrix) {
  out << kMatrixSchema << '\n' << "adapt_structure\ttest_structure\tmean\tlo\thi\tn\n";
  char buf[128];
  for (const auto a : kAllStructures) {
    for (const auto t : kAllStructures) {
      const auto& c = matrix.cells[index_of(a)][index_of(t)];
      std::snprintf(buf, sizeof(buf), "%.9g\t%.9g\t%.9g\t%zu", c.mean, c.lo, c.hi, c.n);
      out << name(a) << '\t' << name(t) << '\t' << buf << '\n';
    }
  }
}

AdaptationMatrix read_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMatrixSchema) {
    throw DataError("matrix schema mismatch: expected '" + std::string(kMatrixSchema) + "'");
  }
  std::getline(in, line);
  AdaptationMatrix m;
  std::array<std::array<bool, kNumStructures>, kNumStructures> seen{};
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string a, t;
    MatrixCell c;
    if (!(fields >> a >> t >> c.mean >> c.lo >> c.hi >> c.n)) throw DataError("malformed matrix line: " + line);
    const auto sa = parse_structure(a);
    const auto st = parse_structure(t);
    if (!sa || !st) throw DataError("unknown structure in matrix line: " + line);
    m.cells[index_of(*sa)][index_of(*st)] = c;
    seen[index_of(*sa)][index_of(*st)] = true;
  }
  for (const auto& row : seen) {
    for (const bool s : row) {
      if (!s) throw DataError("matrix file is missing cells");
    }
  }
  return m;
}

}  // namespace synprime
