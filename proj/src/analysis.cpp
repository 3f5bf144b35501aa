#include "synprime/analysis.hpp"

#include <cstdio>
#include <ostream>
#include <set>

#include "synprime/error.hpp"

namespace synprime {

namespace {

const ModelInfo& info_for(const AnalysisInputs& in, const std::string& model_id) {
  const auto it = in.models.find(model_id);
  if (it == in.models.end()) throw DataError("no model information for '" + model_id + "'");
  return it->second;
}

std::vector<const AdaptationEffect*> select(const AnalysisInputs& in, bool baseline) {
  std::vector<const AdaptationEffect*> out;
  for (const auto& e : in.effects) {
    if (info_for(in, e.key.model_id).baseline == baseline) out.push_back(&e);
  }
  return out;
}

std::vector<const AdaptationEffect*> trained(const AnalysisInputs& in) {
  auto out = select(in, false);
  if (out.empty()) throw DataError("no adaptation effects from trained models");
  return out;
}

template <typename Code>
std::vector<ContrastObservation> observations(const AnalysisInputs& in,
                                              const std::vector<const AdaptationEffect*>& effects,
                                              Code&& code) {
  std::vector<ContrastObservation> obs;
  for (const auto* e : effects) {
    auto codes = code(e->key.adapt_structure, e->key.test_structure);
    if (codes.empty()) continue;
    obs.push_back({e->ae, std::move(codes), e->key.list_id, info_for(in, e->key.model_id).corpus});
  }
  return obs;
}

}  // namespace

AnalysisSection same_structure_analysis(const AnalysisInputs& in) {
  AnalysisSection s{"same-structure", "Same vs. different structure",
                    "AE ~ structure + list + corpus", "Structure adapted to", {}, {}};
  const auto effects = trained(in);
  for (const auto adapt : kAllStructures) {
    const auto obs = observations(in, effects, [&](StructureId a, StructureId t) {
      return a == adapt ? std::vector<double>{t == a ? 1.0 : -1.0} : std::vector<double>{};
    });
    auto r = fit_contrast(obs, {std::string(display_name(adapt))}, in.permutation);
    s.results.push_back(std::move(r.front()));
  }
  s.notes.push_back("structure: +1 when the test structure equals the adaptation structure, -1 otherwise");
  return s;
}

AnalysisSection coordination_analysis(const AnalysisInputs& in) {
  AnalysisSection s{"coordination", "Coordination-adapted models: RC tests vs. the other coordination",
                    "AE ~ testtype + list + corpus", "Adapted to", {}, {}};
  const auto effects = trained(in);
  const auto code = [](std::optional<StructureId> only) {
    return [only](StructureId a, StructureId t) {
      if (!is_coordination(a) || (only && a != *only) || t == a) return std::vector<double>{};
      return std::vector<double>{is_relative_clause(t) ? 1.0 : -1.0};
    };
  };
  for (const auto adapt : {StructureId::CoordPSORC, StructureId::CoordASRC}) {
    auto r = fit_contrast(observations(in, effects, code(adapt)), {std::string(display_name(adapt))},
                          in.permutation);
    s.results.push_back(std::move(r.front()));
  }
  auto pooled = fit_contrast(observations(in, effects, code(std::nullopt)), {"Both (pooled)"},
                             in.permutation);
  s.results.push_back(std::move(pooled.front()));
  s.notes.push_back("testtype: +1 for RC tests, -1 for the other coordination structure");
  s.notes.push_back("fitted per coordination condition and pooled over both");
  return s;
}

AnalysisSection rc_class_analysis(const AnalysisInputs& in) {
  AnalysisSection s{"rc-class", "RC-adapted models: other RCs vs. coordination",
                    "AE ~ testtype + list + corpus", "Contrast", {}, {}};
  const auto obs = observations(in, trained(in), [](StructureId a, StructureId t) {
    if (!is_relative_clause(a) || t == a) return std::vector<double>{};
    return std::vector<double>{is_relative_clause(t) ? 1.0 : -1.0};
  });
  auto r = fit_contrast(obs, {"Other RC vs. coordination"}, in.permutation);
  s.results.push_back(std::move(r.front()));
  s.notes.push_back("testtype: +1 for other RC tests, -1 for coordination tests");
  return s;
}

AnalysisSection subclass_analysis(const AnalysisInputs& in) {
  AnalysisSection s{"subclass", "Object/passive RC sub-classes (baseline: passive match)",
                    "AE ~ testtype + list + corpus", "Contrast", {}, {}};
  const auto member = [](StructureId x) { return is_object_rc(x) || is_passive(x); };
  const auto obs = observations(in, trained(in), [&](StructureId a, StructureId t) {
    if (!member(a) || !member(t)) return std::vector<double>{};
    const bool reduction = is_reduced(a) == is_reduced(t);
    const bool passivity = is_passive(a) == is_passive(t);
    return std::vector<double>{reduction && !passivity ? 1.0 : 0.0, reduction && passivity ? 1.0 : 0.0,
                               !reduction && !passivity ? 1.0 : 0.0};
  });
  s.results = fit_contrast(obs, {"Reduced match", "Both match", "No match"}, in.permutation);
  return s;
}

AdaptationMatrix mean_matrix(const std::vector<const AdaptationEffect*>& effects) {
  std::vector<AdaptationEffect> copy;
  copy.reserve(effects.size());
  for (const auto* e : effects) copy.push_back(*e);
  return adaptation_matrix(copy, {0, 0});
}

std::vector<DistanceObservation> distances_by_model_list(const AnalysisInputs& in,
                                                         const StructureClass& cls, bool baseline) {
  std::map<std::pair<std::string, int>, std::vector<const AdaptationEffect*>> groups;
  for (const auto* e : select(in, baseline)) groups[{e->key.model_id, e->key.list_id}].push_back(e);
  std::vector<DistanceObservation> out;
  for (const auto& [key, effects] : groups) {
    out.push_back({key.first, key.second, distance_ratio(mean_matrix(effects), cls).d});
  }
  return out;
}

std::vector<AnalysisSection> distance_analyses(const AnalysisInputs& in) {
  std::vector<AnalysisSection> out;
  for (const auto& cls : {same_rc_class(), reduction_class(), any_rc_class()}) {
    AnalysisSection s{"distance-" + cls.name, "D(S, not S) for class " + cls.name,
                      "D ~ scale(nhid) * scale(csize) + list + corpus", "Predictor", {}, {}};
    std::vector<RegressionObservation> obs;
    for (const auto& d : distances_by_model_list(in, cls, false)) {
      if (!d.d) {
        s.notes.push_back("D undefined for model " + d.model_id + ", list " + std::to_string(d.list_id) +
                          " (zero out-of-class mean); observation skipped");
        continue;
      }
      const auto& m = info_for(in, d.model_id);
      obs.push_back({*d.d, {static_cast<double>(m.nhid), static_cast<double>(m.corpus_tokens)},
                     d.list_id, m.corpus});
    }
    if (obs.empty()) {
      s.notes.push_back("no defined D values");
    } else {
      RegressionSpec spec{{"nhid", "csize"}, {true, true}, true, true, true};
      auto report = fit_regression(obs, spec, in.permutation);
      s.results = std::move(report.results);
      s.notes.insert(s.notes.end(), report.notes.begin(), report.notes.end());
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<AnalysisSection> agreement_analyses(const AnalysisInputs& in) {
  std::vector<AnalysisSection> out;
  const std::pair<StructureId, const char*> rows[] = {{StructureId::UnreducedObjectRC, "ObjectRC"},
                                                      {StructureId::ReducedObjectRC, "ReducedObjectRC"}};
  for (const auto& [row, construction] : rows) {
    AnalysisSection s{"agreement-" + std::string(short_name(row)),
                      "Agreement accuracy (" + std::string(construction) + ") for models adapted to " +
                          std::string(display_name(row)),
                      "accuracy ~ D(RC, not RC) + scale(nhid) + scale(csize)", "Predictor", {}, {}};
    if (in.agreement.empty()) {
      s.notes.push_back("agreement scores not supplied; analysis skipped");
      out.push_back(std::move(s));
      continue;
    }
    std::vector<RegressionObservation> obs;
    for (const auto& d : distances_by_model_list(in, any_rc_class({row}), false)) {
      const auto it = in.agreement.find(d.model_id);
      if (!d.d || it == in.agreement.end() || !it->second.contains(construction)) {
        s.notes.push_back("model " + d.model_id + ", list " + std::to_string(d.list_id) +
                          ": missing D or accuracy; observation skipped");
        continue;
      }
      const auto& m = info_for(in, d.model_id);
      obs.push_back({it->second.at(construction).accuracy,
                     {*d.d, static_cast<double>(m.nhid), static_cast<double>(m.corpus_tokens)},
                     d.list_id, m.corpus});
    }
    if (!obs.empty()) {
      RegressionSpec spec{{"D(RC, not RC)", "nhid", "csize"}, {false, true, true}, false, false, false};
      auto report = fit_regression(obs, spec, in.permutation);
      s.results = std::move(report.results);
      s.notes.insert(s.notes.end(), report.notes.begin(), report.notes.end());
    }
    out.push_back(std::move(s));
  }
  return out;
}

AnalysisReport analysis_suite(const AnalysisInputs& in) {
  if (in.effects.empty()) throw DataError("analysis needs adaptation effects (none supplied)");
  AnalysisReport report;
  report.sections.push_back(same_structure_analysis(in));
  report.sections.push_back(coordination_analysis(in));
  report.sections.push_back(rc_class_analysis(in));
  report.sections.push_back(subclass_analysis(in));
  for (auto& s : distance_analyses(in)) report.sections.push_back(std::move(s));
  for (auto& s : agreement_analyses(in)) report.sections.push_back(std::move(s));
  return report;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_report_text(std::ostream& out, const AnalysisReport& report) {
  for (const auto& s : report.sections) {
    out << s.title << '\n' << "  " << s.formula << '\n';
    if (!s.results.empty()) {
      std::size_t width = s.label.size();
      for (const auto& r : s.results) width = std::max(width, r.name.size());
      const auto pad = [&](const std::string& text) { return text + std::string(width + 2 - text.size(), ' '); };
      out << "  " << pad(s.label) << "beta      SE        p-value\n";
      for (const auto& r : s.results) {
        const auto beta = fixed(r.beta, 3);
        const auto se = fixed(r.se, 4);
        out << "  " << pad(r.name) << beta << std::string(beta.size() < 10 ? 10 - beta.size() : 1, ' ')
            << se << std::string(se.size() < 10 ? 10 - se.size() : 1, ' ') << format_p(r) << '\n';
      }
    }
    for (const auto& n : s.notes) out << "  note: " << n << '\n';
    out << '\n';
  }
}

void write_report_tsv(std::ostream& out, const AnalysisReport& report) {
  out << "section\tterm\tbeta\tse\tp_value\tn_permutations\tseed\n";
  for (const auto& s : report.sections) {
    for (const auto& r : s.results) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%.9g\t%.9g\t%.9g\t%d\t%llu", r.beta, r.se, r.p_value,
                    r.n_permutations, static_cast<unsigned long long>(r.seed));
      out << s.id << '\t' << r.name << '\t' << buf << '\n';
    }
  }
}

}  // namespace synprime
