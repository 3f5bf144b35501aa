#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace synprime {

// The seven sentence structures compared by the priming experiments.
enum class StructureId : std::uint8_t {
  UnreducedObjectRC,
  ReducedObjectRC,
  UnreducedPassiveRC,
  ReducedPassiveRC,
  ActiveSubjectRC,
  CoordPSORC,
  CoordASRC,
};

inline constexpr std::size_t kNumStructures = 7;

inline constexpr std::array<StructureId, kNumStructures> kAllStructures = {
    StructureId::UnreducedObjectRC, StructureId::ReducedObjectRC,
    StructureId::UnreducedPassiveRC, StructureId::ReducedPassiveRC,
    StructureId::ActiveSubjectRC, StructureId::CoordPSORC,
    StructureId::CoordASRC,
};

constexpr std::size_t index_of(StructureId s) { return static_cast<std::size_t>(s); }

constexpr bool is_relative_clause(StructureId s) {
  return s != StructureId::CoordPSORC && s != StructureId::CoordASRC;
}
constexpr bool is_coordination(StructureId s) { return !is_relative_clause(s); }
constexpr bool is_passive(StructureId s) {
  return s == StructureId::UnreducedPassiveRC || s == StructureId::ReducedPassiveRC;
}
constexpr bool is_object_rc(StructureId s) {
  return s == StructureId::UnreducedObjectRC || s == StructureId::ReducedObjectRC;
}
constexpr bool is_reduced(StructureId s) {
  return s == StructureId::ReducedObjectRC || s == StructureId::ReducedPassiveRC;
}
// Structures whose main-clause subject is the agent of the first verb.
constexpr bool uses_agent_main_verb(StructureId s) {
  return s == StructureId::ActiveSubjectRC || s == StructureId::CoordASRC;
}

// Identifier used in files, e.g. "UnreducedObjectRC".
std::string_view name(StructureId s);
// Short label for plots, e.g. "UORC".
std::string_view short_name(StructureId s);
// Human-readable label for reports, e.g. "Unreduced Object RC".
std::string_view display_name(StructureId s);

// Accepts the identifier or the short label.
std::optional<StructureId> parse_structure(std::string_view text);

}  // namespace synprime
