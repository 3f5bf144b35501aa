#include "synprime/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace synprime {

namespace {

constexpr double kTieTolerance = 1e-9;

struct Cluster {
  DendrogramNode node;
  std::size_t first = 0;  // smallest structure index, used for ordering
  bool alive = true;
};

bool same_height(double a, double b) {
  return std::abs(a - b) <= kTieTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

DendrogramNode merge(DendrogramNode a, DendrogramNode b, double height) {
  DendrogramNode out;
  out.height = height;
  for (auto* child : {&a, &b}) {
    if (!child->is_leaf() && same_height(child->height, height)) {
      for (auto& c : child->children) out.children.push_back(std::move(c));
    } else {
      out.children.push_back(std::move(*child));
    }
  }
  for (const auto& c : out.children) {
    out.members.insert(out.members.end(), c.members.begin(), c.members.end());
  }
  std::sort(out.members.begin(), out.members.end());
  std::sort(out.children.begin(), out.children.end(),
            [](const auto& x, const auto& y) { return x.members.front() < y.members.front(); });
  return out;
}

void render(const DendrogramNode& node, std::string& out) {
  if (node.is_leaf()) {
    out += short_name(node.members.front());
    return;
  }
  out += '(';
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    if (i) out += ' ';
    render(node.children[i], out);
  }
  out += ')';
}

void render_heights(const DendrogramNode& node, int depth, std::string& out) {
  if (node.is_leaf()) return;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", node.height);
  out += std::string(static_cast<std::size_t>(depth) * 2, ' ');
  out += "merge height ";
  out += buf;
  out += ": ";
  for (std::size_t i = 0; i < node.members.size(); ++i) {
    if (i) out += ' ';
    out += short_name(node.members[i]);
  }
  out += '\n';
  for (const auto& c : node.children) render_heights(c, depth + 1, out);
}

}  // namespace

std::string Dendrogram::to_text() const {
  std::string out;
  render(root, out);
  out += '\n';
  render_heights(root, 0, out);
  return out;
}

Dendrogram build_hierarchy(const AdaptationMatrix& matrix) {
  constexpr std::size_t N = kNumStructures;
  std::array<std::array<double, N>, N> sim{};
  double max_sim = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      sim[i][j] = (matrix.cells[i][j].mean + matrix.cells[j][i].mean) / 2.0;
      max_sim = std::max(max_sim, sim[i][j]);
    }
  }
  Dendrogram out;
  out.dissimilarity.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) out.dissimilarity[i][j] = max_sim - sim[i][j];
  }

  std::vector<Cluster> clusters;
  for (std::size_t i = 0; i < N; ++i) {
    Cluster c;
    c.node.members = {kAllStructures[i]};
    c.first = i;
    clusters.push_back(std::move(c));
  }
  // Average linkage over original leaves keeps the result independent of merge order.
  const auto linkage = [&](const Cluster& a, const Cluster& b) {
    double sum = 0.0;
    for (const auto x : a.node.members) {
      for (const auto y : b.node.members) sum += out.dissimilarity[index_of(x)][index_of(y)];
    }
    return sum / static_cast<double>(a.node.members.size() * b.node.members.size());
  };

  for (std::size_t step = 1; step < N; ++step) {
    std::vector<std::size_t> alive;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      if (clusters[i].alive) alive.push_back(i);
    }
    std::sort(alive.begin(), alive.end(),
              [&](auto x, auto y) { return clusters[x].first < clusters[y].first; });
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < alive.size(); ++x) {
      for (std::size_t y = x + 1; y < alive.size(); ++y) {
        best = std::min(best, linkage(clusters[alive[x]], clusters[alive[y]]));
      }
    }
    std::size_t bx = 0, by = 0;
    bool found = false;
    for (std::size_t x = 0; x < alive.size() && !found; ++x) {
      for (std::size_t y = x + 1; y < alive.size() && !found; ++y) {
        if (same_height(linkage(clusters[alive[x]], clusters[alive[y]]), best)) {
          bx = alive[x];
          by = alive[y];
          found = true;
        }
      }
    }
    Cluster merged;
    merged.node = merge(std::move(clusters[bx].node), std::move(clusters[by].node), best);
    merged.first = std::min(clusters[bx].first, clusters[by].first);
    clusters[bx].alive = clusters[by].alive = false;
    clusters.push_back(std::move(merged));
  }
  out.root = std::move(clusters.back().node);
  return out;
}

}  // namespace synprime
