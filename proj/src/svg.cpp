#include "imp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace imp {

namespace {

struct Chain {
  std::vector<std::pair<double, Eigen::Vector2d>> points;  // (parameter along the root edge, projection)
};

std::map<Edge, Chain> chains_of(const PLMap& m, int i, int j) {
  std::map<Edge, Chain> out;
  for (const Edge& e : m.domain().edges()) {
    Edge root;
    double tu, tv;
    if (!m.carrier().root_edge_of(e.a, e.b, root, tu, tv)) continue;
    auto& pts = out[root].points;
    pts.emplace_back(tu, Eigen::Vector2d(m.image(e.a)[i], m.image(e.a)[j]));
    pts.emplace_back(tv, Eigen::Vector2d(m.image(e.b)[i], m.image(e.b)[j]));
  }
  for (auto& [e, c] : out) {
    std::stable_sort(c.points.begin(), c.points.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    c.points.erase(std::unique(c.points.begin(), c.points.end(),
                               [](const auto& x, const auto& y) { return x.first == y.first; }),
                   c.points.end());
  }
  return out;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

}  // namespace

std::string render_svg(const PolyhedronDocument& doc, int i, int j) {
  std::vector<std::pair<const PLMap*, bool>> maps;  // (map, dashed)
  if (doc.source_map) maps.emplace_back(&*doc.source_map, true);
  if (doc.map) maps.emplace_back(&*doc.map, false);
  if (maps.empty()) throw DocumentError("plot: the document has no map");
  const MinkowskiSignature sig = maps.back().first->signature();
  for (auto [m, dashed] : maps) {
    const int dim = m->signature().dimension();
    if (i < 0 || j < 0 || i >= dim || j >= dim || i == j)
      throw DocumentError("plot: projection coordinates must be two distinct indices below " + std::to_string(dim));
  }

  std::vector<std::pair<std::map<Edge, Chain>, bool>> all;
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_x;
  for (auto [m, dashed] : maps) {
    all.emplace_back(chains_of(*m, i, j), dashed);
    for (const auto& x : m->images()) {
      lo_x = std::min(lo_x, x[i]);
      hi_x = std::max(hi_x, x[i]);
      lo_y = std::min(lo_y, x[j]);
      hi_y = std::max(hi_y, x[j]);
    }
  }
  const double size = 800.0;
  const double pad = 40.0;
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
  const double scale = (size - 2.0 * pad) / span;
  auto sx = [&](double x) { return pad + (x - lo_x) * scale; };
  auto sy = [&](double y) { return size - pad - (y - lo_y) * scale; };
  auto colour = [&](int c) { return c < sig.p ? "#1f4e9e" : "#b22222"; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << size << "\" height=\"" << size
     << "\" viewBox=\"0 0 " << size << " " << size << "\">\n";
  os << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "  <text x=\"" << size / 2 << "\" y=\"" << size - 8 << "\" fill=\"" << colour(i)
     << "\" font-family=\"sans-serif\" font-size=\"14\">x" << i << "</text>\n";
  os << "  <text x=\"8\" y=\"" << size / 2 << "\" fill=\"" << colour(j)
     << "\" font-family=\"sans-serif\" font-size=\"14\">x" << j << "</text>\n";
  const SimplicialComplex& root = doc.root();
  for (const auto& [chains, dashed] : all) {
    for (const auto& [e, c] : chains) {
      os << "  <polyline class=\"" << (dashed ? "source" : "map") << "\" data-edge=\"" << root.label(e.a) << "-"
         << root.label(e.b) << "\" fill=\"none\" stroke=\"" << (dashed ? "#888888" : "#000000")
         << "\" stroke-width=\"1.5\"" << (dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
      for (std::size_t k = 0; k < c.points.size(); ++k) {
        if (k) os << ' ';
        os << fmt(sx(c.points[k].second.x())) << ',' << fmt(sy(c.points[k].second.y()));
      }
      os << "\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace imp
