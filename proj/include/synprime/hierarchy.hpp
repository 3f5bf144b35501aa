#pragma once

#include <array>
#include <string>
#include <vector>

#include "synprime/metrics.hpp"

namespace synprime {

// Node of a clustering tree. Leaves have no children and height 0; internal
// nodes store the average-linkage distance at which their children merged.
// Children merged at the same height as their parent are flattened into it.
struct DendrogramNode {
  std::vector<StructureId> members;  // in structure-id order
  double height = 0.0;
  std::vector<DendrogramNode> children;

  bool is_leaf() const { return children.empty(); }
};

struct Dendrogram {
  DendrogramNode root;
  std::vector<std::array<double, kNumStructures>> dissimilarity;  // d = max(sim) - sim

  // Nested text such as "((UORC RORC) UPRC ...)" followed by merge heights.
  std::string to_text() const;
};

// sim(X, Y) = (cell(X, Y) + cell(Y, X)) / 2, d = max(sim) - sim, then average
// linkage. Ties within 1e-9 of the smallest distance go to the pair whose
// clusters come first in structure-id order.
Dendrogram build_hierarchy(const AdaptationMatrix& matrix);

}  // namespace synprime
