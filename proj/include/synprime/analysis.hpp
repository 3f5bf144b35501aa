#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "synprime/agreement.hpp"
#include "synprime/metrics.hpp"
#include "synprime/stats.hpp"

namespace synprime {

struct ModelInfo {
  std::string id;
  int nhid = 0;
  std::uint64_t corpus_tokens = 0;
  std::string corpus;  // corpus slice the model was trained on
  bool baseline = false;
};

struct AnalysisInputs {
  std::vector<AdaptationEffect> effects;  // all models, trained and baseline
  std::map<std::string, ModelInfo> models;
  // model id -> construction -> score; only needed for the agreement analysis.
  std::map<std::string, std::map<std::string, AgreementScore>> agreement;
  PermutationOptions permutation;
};

struct AnalysisSection {
  std::string id;       // "same-structure", "coordination", ...
  std::string title;
  std::string formula;
  std::string label;    // first column heading
  std::vector<TestResult> results;
  std::vector<std::string> notes;
};

struct AnalysisReport {
  std::vector<AnalysisSection> sections;
};

// Same vs. different test structure, one contrast per adaptation structure (+1 same, -1 different).
AnalysisSection same_structure_analysis(const AnalysisInputs& in);
// Coordination-adapted models: RC tests (+1) against the other coordination (-1),
// per coordination condition and pooled.
AnalysisSection coordination_analysis(const AnalysisInputs& in);
// RC-adapted models: other RC tests (+1) against coordination tests (-1).
AnalysisSection rc_class_analysis(const AnalysisInputs& in);
// Object/passive RC-adapted models tested on object/passive RCs: four match levels
// with passive match as the baseline.
AnalysisSection subclass_analysis(const AnalysisInputs& in);
// D per (model, list) for each class, regressed on scale(nhid) * scale(csize).
std::vector<AnalysisSection> distance_analyses(const AnalysisInputs& in);
// Agreement accuracy on D(RC, not RC) of the object RC rows plus scale(nhid) and scale(csize).
std::vector<AnalysisSection> agreement_analyses(const AnalysisInputs& in);

// Every analysis above. Sections whose inputs are absent are replaced by a note
// naming what is missing; effects themselves are required.
AnalysisReport analysis_suite(const AnalysisInputs& in);

// Effects of one model and list as a matrix without bootstrap intervals.
AdaptationMatrix mean_matrix(const std::vector<const AdaptationEffect*>& effects);

// D of `cls` for every (model, list) of the selected models.
struct DistanceObservation {
  std::string model_id;
  int list_id = 0;
  std::optional<double> d;
};
std::vector<DistanceObservation> distances_by_model_list(const AnalysisInputs& in,
                                                         const StructureClass& cls, bool baseline);

// Aligned text table and a tab-separated version.
void write_report_text(std::ostream& out, const AnalysisReport& report);
void write_report_tsv(std::ostream& out, const AnalysisReport& report);

}  // namespace synprime
