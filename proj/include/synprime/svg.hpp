#pragma once

#include <string>

#include "synprime/hierarchy.hpp"
#include "synprime/metrics.hpp"

namespace synprime {

// Heatmap of the adaptation matrix (rows: adapted to, columns: tested on) with a
// colour legend. Output depends only on the matrix values.
std::string heatmap_svg(const AdaptationMatrix& matrix, const std::string& title);

// Dendrogram with leaves in tree order and merge heights on a vertical axis.
std::string dendrogram_svg(const Dendrogram& tree, const std::string& title);

}  // namespace synprime
