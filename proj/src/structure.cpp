#include "synprime/structure.hpp"

namespace synprime {

namespace {

struct Names {
  std::string_view id;
  std::string_view label;
  std::string_view display;
};

constexpr std::array<Names, kNumStructures> kNames = {{
    {"UnreducedObjectRC", "UORC", "Unreduced Object RC"},
    {"ReducedObjectRC", "RORC", "Reduced Object RC"},
    {"UnreducedPassiveRC", "UPRC", "Unreduced Passive RC"},
    {"ReducedPassiveRC", "RPRC", "Reduced Passive RC"},
    {"ActiveSubjectRC", "ASRC", "Active Subject RC"},
    {"CoordPSORC", "CoordPSORC", "PS/ORC-matched Coordination"},
    {"CoordASRC", "CoordASRC", "ASRC-matched Coordination"},
}};

}  // namespace

std::string_view name(StructureId s) { return kNames[index_of(s)].id; }
std::string_view short_name(StructureId s) { return kNames[index_of(s)].label; }
std::string_view display_name(StructureId s) { return kNames[index_of(s)].display; }

std::optional<StructureId> parse_structure(std::string_view text) {
  for (const auto s : kAllStructures) {
    if (text == name(s) || text == short_name(s)) return s;
  }
  return std::nullopt;
}

}  // namespace synprime
