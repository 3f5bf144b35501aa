#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "synprime/language_model.hpp"
#include "synprime/structure.hpp"
#include "synprime/templates.hpp"

namespace synprime {

struct TestSentence {
  int sentence_id = 0;
  Sentence tokens;
};

// Adaptation and test sentences of one experimental list, by structure.
struct StimulusList {
  int list_id = 0;
  std::array<std::vector<Sentence>, kNumStructures> adaptation;
  std::array<std::vector<TestSentence>, kNumStructures> test;
};

std::vector<StimulusList> to_stimuli(const std::vector<ExperimentList>& lists);
// Throws DataError if a list lacks a structure's adaptation or test set.
std::vector<StimulusList> to_stimuli(const std::vector<ListRow>& rows);

struct SurprisalRecord {
  std::string model_id;
  StructureId adapt_structure = StructureId::UnreducedObjectRC;
  StructureId test_structure = StructureId::UnreducedObjectRC;
  int list_id = 0;
  int sentence_id = 0;
  double surp_pre = 0.0;   // mean bits under the unadapted model
  double surp_post = 0.0;  // mean bits after adapting to adapt_structure

  friend bool operator==(const SurprisalRecord&, const SurprisalRecord&) = default;
};

struct PlanModel {
  std::string id;
  std::filesystem::path checkpoint;             // read when `snapshot` is null
  std::shared_ptr<const ModelSnapshot> snapshot;
};

struct ExperimentPlan {
  std::vector<PlanModel> models;
  std::vector<StimulusList> lists;
  AdaptConfig adapt;
  std::filesystem::path output;  // records file; empty keeps results in memory only
  int workers = 1;
};

struct GridResult {
  std::vector<SurprisalRecord> records;  // sorted
  std::vector<std::string> excluded;     // test sentences with no known token
  std::size_t cells_computed = 0;        // (model, list, adapt structure) cells run
};

// Every (model, list, adapt structure) cell adapts a fresh copy of the model to the
// cell's 20 adaptation sentences and scores all test sentences before and after.
// When plan.output is set, finished cells are appended to it as they complete and
// the file is rewritten in sorted order at the end.
GridResult run_grid(const ExperimentPlan& plan);

// Like run_grid, but keeps the complete cells already present in plan.output and
// computes only the missing ones. Cells with some but not all records are redone.
GridResult resume_grid(const ExperimentPlan& plan);

// Orders by (model, list, adapt, test, sentence).
void sort_records(std::vector<SurprisalRecord>& records);

inline constexpr std::string_view kRecordsSchema = "#synprime-records\t1";

// Tab-separated with 9 significant digits, after a schema line and a header.
void write_records(std::ostream& out, const std::vector<SurprisalRecord>& records);
void write_records_file(const std::filesystem::path& path, std::vector<SurprisalRecord> records);
// Throws DataError on a schema mismatch or malformed line (with its line number).
std::vector<SurprisalRecord> read_records(std::istream& in);
std::vector<SurprisalRecord> read_records_file(const std::filesystem::path& path);

}  // namespace synprime
