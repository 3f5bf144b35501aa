#include "synprime/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace synprime {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// White to dark blue.
std::string colour(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const auto channel = [&](double from, double to) {
    return static_cast<int>(std::lround(from + (to - from) * t));
  };
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", channel(247, 8), channel(251, 48), channel(255, 107));
  return buf;
}

}  // namespace

std::string heatmap_svg(const AdaptationMatrix& matrix, const std::string& title) {
  constexpr int cell = 56, left = 110, top = 60;
  constexpr int n = static_cast<int>(kNumStructures);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& row : matrix.cells) {
    for (const auto& c : row) {
      lo = std::min(lo, c.mean);
      hi = std::max(hi, c.mean);
    }
  }
  const bool flat = !(hi > lo);
  const auto scale = [&](double v) { return flat ? 0.5 : (v - lo) / (hi - lo); };

  const int width = left + n * cell + 130;
  const int height = top + n * cell + 70;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">" << escape(title) << "</text>\n";
  s << "<text x=\"" << left + n * cell / 2 << "\" y=\"" << top - 24
    << "\" text-anchor=\"middle\">tested on</text>\n";
  s << "<text x=\"16\" y=\"" << top + n * cell / 2 << "\" transform=\"rotate(-90 16 " << top + n * cell / 2
    << ")\" text-anchor=\"middle\">adapted to</text>\n";
  for (int i = 0; i < n; ++i) {
    const auto label = short_name(kAllStructures[static_cast<std::size_t>(i)]);
    s << "<text x=\"" << left + i * cell + cell / 2 << "\" y=\"" << top - 6
      << "\" text-anchor=\"middle\">" << label << "</text>\n";
    s << "<text x=\"" << left - 6 << "\" y=\"" << top + i * cell + cell / 2 + 4
      << "\" text-anchor=\"end\">" << label << "</text>\n";
  }
  for (int a = 0; a < n; ++a) {
    for (int t = 0; t < n; ++t) {
      const double v = matrix.cells[static_cast<std::size_t>(a)][static_cast<std::size_t>(t)].mean;
      const double shade = scale(v);
      s << "<rect x=\"" << left + t * cell << "\" y=\"" << top + a * cell << "\" width=\"" << cell
        << "\" height=\"" << cell << "\" fill=\"" << colour(shade) << "\" stroke=\"#ffffff\"/>\n";
      s << "<text x=\"" << left + t * cell + cell / 2 << "\" y=\"" << top + a * cell + cell / 2 + 4
        << "\" text-anchor=\"middle\" fill=\"" << (shade > 0.6 ? "#ffffff" : "#000000") << "\">"
        << num(v) << "</text>\n";
    }
  }

  // Legend: a gradient bar, or a single swatch when every cell holds the same value.
  const int lx = left + n * cell + 30;
  if (flat) {
    s << "<rect x=\"" << lx << "\" y=\"" << top << "\" width=\"20\" height=\"20\" fill=\"" << colour(0.5)
      << "\"/>\n";
    s << "<text x=\"" << lx + 26 << "\" y=\"" << top + 14 << "\">" << num(lo) << "</text>\n";
  } else {
    constexpr int steps = 10;
    const int bar = n * cell;
    for (int k = 0; k < steps; ++k) {
      const double t = 1.0 - (k + 0.5) / steps;
      s << "<rect x=\"" << lx << "\" y=\"" << top + k * bar / steps << "\" width=\"20\" height=\""
        << bar / steps << "\" fill=\"" << colour(t) << "\"/>\n";
    }
    s << "<text x=\"" << lx + 26 << "\" y=\"" << top + 10 << "\">" << num(hi) << "</text>\n";
    s << "<text x=\"" << lx + 26 << "\" y=\"" << top + bar << "\">" << num(lo) << "</text>\n";
  }
  s << "<text x=\"" << lx << "\" y=\"" << top + n * cell + 24 << "\">mean AE (bits)</text>\n";
  s << "</svg>\n";
  return s.str();
}

namespace {

struct Layout {
  std::map<const DendrogramNode*, double> x;
  double next_leaf = 0.0;
};

double place(const DendrogramNode& node, Layout& layout) {
  if (node.is_leaf()) return layout.x[&node] = layout.next_leaf++;
  double sum = 0.0;
  for (const auto& c : node.children) sum += place(c, layout);
  return layout.x[&node] = sum / static_cast<double>(node.children.size());
}

}  // namespace

std::string dendrogram_svg(const Dendrogram& tree, const std::string& title) {
  constexpr int spacing = 70, left = 70, top = 50, plot = 260;
  Layout layout;
  place(tree.root, layout);
  const double max_height = tree.root.height > 0.0 ? tree.root.height : 1.0;
  const auto px = [&](const DendrogramNode& node) { return left + 20 + layout.x.at(&node) * spacing; };
  const auto py = [&](double h) { return top + plot - h / max_height * plot; };

  const int width = left + 40 + static_cast<int>(kNumStructures) * spacing;
  const int height = top + plot + 50;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">" << escape(title) << "</text>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot
    << "\" stroke=\"#000000\"/>\n";
  for (const double h : {0.0, max_height / 2.0, max_height}) {
    s << "<text x=\"" << left - 4 << "\" y=\"" << num(py(h) + 4) << "\" text-anchor=\"end\">" << num(h)
      << "</text>\n";
  }

  const auto draw = [&](const auto& self, const DendrogramNode& node) -> void {
    if (node.is_leaf()) {
      s << "<text x=\"" << num(px(node)) << "\" y=\"" << top + plot + 18 << "\" text-anchor=\"middle\">"
        << short_name(node.members.front()) << "</text>\n";
      return;
    }
    const double y = py(node.height);
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    for (const auto& c : node.children) {
      const double cx = px(c);
      x_min = std::min(x_min, cx);
      x_max = std::max(x_max, cx);
      s << "<line x1=\"" << num(cx) << "\" y1=\"" << num(py(c.height)) << "\" x2=\"" << num(cx)
        << "\" y2=\"" << num(y) << "\" stroke=\"#08306b\"/>\n";
      self(self, c);
    }
    s << "<line x1=\"" << num(x_min) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x_max) << "\" y2=\""
      << num(y) << "\" stroke=\"#08306b\"/>\n";
  };
  draw(draw, tree.root);
  s << "</svg>\n";
  return s.str();
}

}  // namespace synprime
