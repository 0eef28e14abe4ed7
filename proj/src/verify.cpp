#include "imp/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

namespace imp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Root support and barycentric weights of both endpoints on the union.
struct PiecePosition {
  Simplex support;
  std::vector<double> at_u;
  std::vector<double> at_v;
};

PiecePosition locate(const CarrierMap& carrier, VertexId u, VertexId v) {
  PiecePosition p;
  const Carrier& cu = carrier[u];
  const Carrier& cv = carrier[v];
  p.support = cu.support;
  p.support.insert(p.support.end(), cv.support.begin(), cv.support.end());
  std::sort(p.support.begin(), p.support.end());
  p.support.erase(std::unique(p.support.begin(), p.support.end()), p.support.end());
  p.at_u.assign(p.support.size(), 0.0);
  p.at_v.assign(p.support.size(), 0.0);
  auto fill = [&](const Carrier& c, std::vector<double>& w) {
    for (std::size_t i = 0; i < c.support.size(); ++i) {
      auto it = std::lower_bound(p.support.begin(), p.support.end(), c.support[i]);
      w[it - p.support.begin()] = c.weights[i];
    }
  };
  fill(cu, p.at_u);
  fill(cv, p.at_v);
  return p;
}

double energy_of(const Eigen::VectorXd& d, int p) {
  double pos = 0.0;
  double neg = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) (i < p ? pos : neg) += d[i] * d[i];
  return pos - neg;
}

}  // namespace

EnergyReport verify_isometry(const PLMap& h, const EdgeMetric& g, double tol) {
  EnergyReport r;
  r.pass = true;
  const int p = h.signature().p;
  for (const Edge& e : h.domain().edges()) {
    const PiecePosition pos = locate(h.carrier(), e.a, e.b);
    std::vector<double> delta(pos.support.size());
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = pos.at_v[i] - pos.at_u[i];

    double expected = 0.0;
    for (std::size_t i = 0; i < delta.size(); ++i) {
      for (std::size_t j = i + 1; j < delta.size(); ++j) {
        const Edge root{pos.support[i], pos.support[j]};
        if (!g.has(root)) {
          r.pass = false;
          r.reason = "child edge is not carried by a simplex with known energies";
          r.worst_child = e;
          r.worst_parent = pos.support;
          return r;
        }
        expected -= delta[i] * delta[j] * g.energy(root);
      }
    }
    const Eigen::VectorXd d = h.image(e.b) - h.image(e.a);
    const double achieved = energy_of(d, p);
    const double scale = std::max(std::abs(expected), d.squaredNorm());
    const double err = scale > 0.0 ? std::abs(achieved - expected) / scale : std::abs(achieved - expected);
    ++r.edges_checked;
    if (!r.worst_child || err > r.max_relative_error) {
      r.max_relative_error = err;
      r.worst_child = e;
      r.worst_parent = pos.support;
    }
  }
  r.pass = r.max_relative_error <= tol;
  return r;
}

namespace {

double point_segment_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& q0, const Eigen::VectorXd& q1) {
  const Eigen::VectorXd v = q1 - q0;
  const double vv = v.squaredNorm();
  double t = vv > 0.0 ? (x - q0).dot(v) / vv : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (q0 + t * v - x).norm();
}

// Convex quadratic over the unit square: interior stationary point if it lies
// inside, otherwise the best of the four boundary point-segment distances.
double segment_distance(const Eigen::VectorXd& p0, const Eigen::VectorXd& p1, const Eigen::VectorXd& q0,
                        const Eigen::VectorXd& q1) {
  double best = std::min({point_segment_distance(p0, q0, q1), point_segment_distance(p1, q0, q1),
                          point_segment_distance(q0, p0, p1), point_segment_distance(q1, p0, p1)});
  const Eigen::VectorXd u = p1 - p0;
  const Eigen::VectorXd v = q1 - q0;
  const Eigen::VectorXd w = p0 - q0;
  const double a = u.dot(u), b = u.dot(v), c = v.dot(v), d = u.dot(w), e = v.dot(w);
  const double det = a * c - b * b;
  if (det > 1e-14 * a * c) {
    const double s = (b * e - c * d) / det;
    const double t = (a * e - b * d) / det;
    if (s > 0.0 && s < 1.0 && t > 0.0 && t < 1.0) best = std::min(best, (w + s * u - t * v).norm());
  }
  return best;
}

// Bounding volume hierarchy over axis-aligned boxes, used to enumerate every
// pair of items whose boxes come within `reach` of each other.
class BoxTree {
 public:
  BoxTree(std::vector<double> lo, std::vector<double> hi, int dim) : lo_(std::move(lo)), hi_(std::move(hi)), dim_(dim) {
    const int n = static_cast<int>(lo_.size()) / dim_;
    order_.resize(n);
    for (int i = 0; i < n; ++i) order_[i] = i;
    if (n > 0) build(0, n);
  }

  /// Calls visit(i, j) with i < j for every candidate pair; stops as soon as
  /// visit returns false. Returns false when stopped.
  template <class Visit>
  bool pairs(double reach, Visit&& visit) const {
    if (nodes_.empty()) return true;
    return self(0, reach, visit);
  }

 private:
  struct Node {
    int begin, end;
    int left = -1, right = -1;
    std::vector<double> lo, hi;
  };

  int build(int begin, int end) {
    Node node{begin, end, -1, -1, std::vector<double>(dim_, kInf), std::vector<double>(dim_, -kInf)};
    for (int k = begin; k < end; ++k)
      for (int c = 0; c < dim_; ++c) {
        node.lo[c] = std::min(node.lo[c], lo_[order_[k] * dim_ + c]);
        node.hi[c] = std::max(node.hi[c], hi_[order_[k] * dim_ + c]);
      }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= kLeaf) return id;
    int axis = 0;
    for (int c = 1; c < dim_; ++c)
      if (node.hi[c] - node.lo[c] > node.hi[axis] - node.lo[axis]) axis = c;
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int x, int y) {
      return lo_[x * dim_ + axis] + hi_[x * dim_ + axis] < lo_[y * dim_ + axis] + hi_[y * dim_ + axis];
    });
    const int l = build(begin, mid);
    const int r = build(mid, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  static double gap2(const double* alo, const double* ahi, const double* blo, const double* bhi, int dim) {
    double s = 0.0;
    for (int c = 0; c < dim; ++c) {
      const double g = std::max({0.0, alo[c] - bhi[c], blo[c] - ahi[c]});
      s += g * g;
    }
    return s;
  }

  template <class Visit>
  bool leaf_pairs(const Node& a, const Node& b, bool same, double reach, Visit& visit) const {
    for (int x = a.begin; x < a.end; ++x)
      for (int y = same ? x + 1 : b.begin; y < b.end; ++y) {
        const int i = order_[x], j = order_[y];
        if (gap2(&lo_[i * dim_], &hi_[i * dim_], &lo_[j * dim_], &hi_[j * dim_], dim_) > reach * reach) continue;
        if (!visit(std::min(i, j), std::max(i, j))) return false;
      }
    return true;
  }

  template <class Visit>
  bool self(int id, double reach, Visit& visit) const {
    const Node& n = nodes_[id];
    if (n.left < 0) return leaf_pairs(n, n, true, reach, visit);
    return self(n.left, reach, visit) && self(n.right, reach, visit) && cross(n.left, n.right, reach, visit);
  }

  template <class Visit>
  bool cross(int ia, int ib, double reach, Visit& visit) const {
    const Node& a = nodes_[ia];
    const Node& b = nodes_[ib];
    if (gap2(a.lo.data(), a.hi.data(), b.lo.data(), b.hi.data(), dim_) > reach * reach) return true;
    if (a.left < 0 && b.left < 0) return leaf_pairs(a, b, false, reach, visit);
    if (b.left < 0 || (a.left >= 0 && a.end - a.begin >= b.end - b.begin))
      return cross(a.left, ib, reach, visit) && cross(a.right, ib, reach, visit);
    return cross(ia, b.left, reach, visit) && cross(ia, b.right, reach, visit);
  }

  static constexpr int kLeaf = 4;
  std::vector<double> lo_, hi_;
  int dim_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

}  // namespace

EmbeddingReport verify_embedding(const PLMap& h, std::optional<double> slack, const EdgeMetric* g) {
  EmbeddingReport r;
  const SimplicialComplex& dom = h.domain();
  if (dom.dimension() > 1) {
    r.reason = "embedding check supports graph domains only";
    return r;
  }
  const int dim = h.signature().dimension();

  // Items: child edges, plus isolated vertices as point items.
  struct Item {
    VertexId u, v;
    bool point;
    bool collapsed_ok;
  };
  std::vector<Item> items;
  for (const Edge& e : dom.edges()) items.push_back({e.a, e.b, false, false});
  for (VertexId v = 0; v < dom.vertex_count(); ++v)
    if (dom.incident_edges(v).empty()) items.push_back({v, v, true, false});

  Eigen::VectorXd lo = Eigen::VectorXd::Constant(dim, kInf);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(dim, -kInf);
  for (const auto& x : h.images()) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  const double diameter = dom.vertex_count() ? (hi - lo).norm() : 0.0;
  r.slack = slack.value_or(1e-12 * diameter);

  for (auto& it : items) {
    if (it.point) continue;
    const double len = (h.image(it.v) - h.image(it.u)).norm();
    if (len <= r.slack) {
      Edge root;
      double tu, tv;
      const bool zero_edge = g && h.carrier().root_edge_of(it.u, it.v, root, tu, tv) && g->has(root) &&
                             g->energy(root) == 0.0;
      if (!zero_edge) {
        r.offending = std::make_pair(Edge{it.u, it.v}, Edge{it.u, it.v});
        r.reason = "degenerate segment";
        return r;
      }
      it.collapsed_ok = true;
    }
  }

  // Candidate pairs: boxes within slack of each other. Anything farther apart
  // cannot violate the test.
  std::vector<double> box_lo(items.size() * dim), box_hi(items.size() * dim);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Eigen::VectorXd& a = h.image(items[i].u);
    const Eigen::VectorXd& b = h.image(items[i].v);
    for (int c = 0; c < dim; ++c) {
      box_lo[i * dim + c] = std::min(a[c], b[c]);
      box_hi[i * dim + c] = std::max(a[c], b[c]);
    }
  }
  const BoxTree tree(std::move(box_lo), std::move(box_hi), dim);

  auto test_pair = [&](int i, int j) -> bool {
    const Item& A = items[i];
    const Item& B = items[j];
    ++r.pairs_tested;
    const Eigen::VectorXd& a0 = h.image(A.u);
    const Eigen::VectorXd& a1 = h.image(A.v);
    const Eigen::VectorXd& b0 = h.image(B.u);
    const Eigen::VectorXd& b1 = h.image(B.v);
    VertexId shared = -1;
    if (!A.point && !B.point) {
      if (A.u == B.u || A.u == B.v) shared = A.u;
      else if (A.v == B.u || A.v == B.v) shared = A.v;
    }
    if (shared >= 0) {
      if (A.collapsed_ok || B.collapsed_ok) return true;
      const Eigen::VectorXd& far_a = (A.u == shared) ? a1 : a0;
      const Eigen::VectorXd& far_b = (B.u == shared) ? b1 : b0;
      const double d = std::min(point_segment_distance(far_a, b0, b1), point_segment_distance(far_b, a0, a1));
      if (d <= r.slack) {
        r.reason = "segments sharing a vertex overlap";
        return false;
      }
      return true;
    }
    if (segment_distance(a0, a1, b0, b1) <= r.slack) {
      r.reason = "segments intersect";
      return false;
    }
    return true;
  };

  const bool clean = tree.pairs(r.slack, [&](int i, int j) {
    if (test_pair(i, j)) return true;
    r.offending = std::make_pair(Edge{items[i].u, items[i].v}, Edge{items[j].u, items[j].v});
    return false;
  });
  if (!clean) return r;
  r.pass = true;
  return r;
}

ClosenessReport verify_closeness(const PLMap& f, const PLMap& h, const ShellDecomposition& shells,
                                 std::span<const double> epsilon, int samples_per_edge) {
  if (samples_per_edge < 2) throw FormError("closeness needs at least two samples per edge");
  if (epsilon.empty()) throw FormError("empty epsilon schedule");
  if (!f.is_on_root()) throw FormError("reference map must live on the original complex");
  if (f.signature() != h.signature()) throw FormError("maps have different target signatures");

  ClosenessReport r;
  r.sup_deviation.assign(shells.shells.size(), 0.0);
  for (std::size_t k = 0; k < shells.shells.size(); ++k)
    r.epsilon.push_back(epsilon[std::min(k, epsilon.size() - 1)]);

  auto shell_index = [&](const std::vector<double>& w, const Simplex& support) {
    Simplex s;
    for (std::size_t i = 0; i < support.size(); ++i)
      if (w[i] > 0.0) s.push_back(support[i]);
    auto it = shells.index.find(s);
    if (it != shells.index.end()) return it->second;
    return shells.shell_of(s);
  };
  auto f_at = [&](const std::vector<double>& w, const Simplex& support) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(f.signature().dimension());
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (support[i] >= f.domain().vertex_count()) throw FormError("shell/complex mismatch");
      x += w[i] * f.image(support[i]);
    }
    return x;
  };

  const SimplicialComplex& dom = h.domain();
  for (const Edge& e : dom.edges()) {
    const PiecePosition pos = locate(h.carrier(), e.a, e.b);
    const std::size_t k_u = shell_index(pos.at_u, pos.support);
    const std::size_t k_v = shell_index(pos.at_v, pos.support);
    std::vector<double> mid(pos.support.size());
    for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (pos.at_u[i] + pos.at_v[i]);
    const std::size_t k_mid = shell_index(mid, pos.support);
    const Eigen::VectorXd f_u = f_at(pos.at_u, pos.support);
    const Eigen::VectorXd f_v = f_at(pos.at_v, pos.support);
    const Eigen::VectorXd& h_u = h.image(e.a);
    const Eigen::VectorXd& h_v = h.image(e.b);
    for (int j = 0; j < samples_per_edge; ++j) {
      const double s = static_cast<double>(j) / (samples_per_edge - 1);
      const std::size_t k = (j == 0) ? k_u : (j == samples_per_edge - 1) ? k_v : k_mid;
      const double dev = ((1.0 - s) * (h_u - f_u) + s * (h_v - f_v)).norm();
      r.sup_deviation[k] = std::max(r.sup_deviation[k], dev);
      ++r.samples;
    }
  }
  for (VertexId v = 0; v < dom.vertex_count(); ++v) {
    if (!dom.incident_edges(v).empty()) continue;
    const Carrier& c = h.carrier()[v];
    const std::size_t k = shell_index(c.weights, c.support);
    r.sup_deviation[k] = std::max(r.sup_deviation[k], (h.image(v) - f_at(c.weights, c.support)).norm());
    ++r.samples;
  }
  r.pass = true;
  for (std::size_t k = 0; k < r.sup_deviation.size(); ++k)
    if (!(r.sup_deviation[k] < r.epsilon[k])) r.pass = false;
  return r;
}

namespace {

struct HalfPlane {
  double a, b, c;  // a*x + b*y >= c
};

using Polygon = std::vector<std::array<double, 2>>;

Polygon clip(const Polygon& poly, const HalfPlane& hp) {
  Polygon out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& P = poly[i];
    const auto& Q = poly[(i + 1) % n];
    const double fp = hp.a * P[0] + hp.b * P[1] - hp.c;
    const double fq = hp.a * Q[0] + hp.b * Q[1] - hp.c;
    if (fp >= 0.0) out.push_back(P);
    if ((fp >= 0.0) != (fq >= 0.0)) {
      const double t = fp / (fp - fq);
      out.push_back({P[0] + t * (Q[0] - P[0]), P[1] + t * (Q[1] - P[1])});
    }
  }
  return out;
}

// min |w + x*u - y*v| over a convex polygon in (x, y).
double min_over_polygon(const Polygon& poly, const Eigen::VectorXd& w, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& v) {
  if (poly.empty()) return kInf;
  auto value = [&](double x, double y) { return (w + x * u - y * v).norm(); };
  double best = kInf;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& P = poly[i];
    const auto& Q = poly[(i + 1) % poly.size()];
    // Along P + t (Q - P): residual r0 + t r1.
    const Eigen::VectorXd r0 = w + P[0] * u - P[1] * v;
    const Eigen::VectorXd r1 = (Q[0] - P[0]) * u - (Q[1] - P[1]) * v;
    const double rr = r1.squaredNorm();
    double t = rr > 0.0 ? -r0.dot(r1) / rr : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min({best, (r0 + t * r1).norm(), value(P[0], P[1])});
  }
  const double a = u.dot(u), b = u.dot(v), c = v.dot(v), d = u.dot(w), e = v.dot(w);
  const double det = a * c - b * b;
  if (det > 1e-14 * a * c && det > 0.0) {
    const double x = (b * e - c * d) / det;
    const double y = (a * e - b * d) / det;
    bool inside = true;
    for (std::size_t i = 0; i < poly.size() && inside; ++i) {
      const auto& P = poly[i];
      const auto& Q = poly[(i + 1) % poly.size()];
      const double cross = (Q[0] - P[0]) * (y - P[1]) - (Q[1] - P[1]) * (x - P[0]);
      inside = cross >= 0.0;
    }
    if (!inside) {
      inside = true;
      for (std::size_t i = 0; i < poly.size() && inside; ++i) {
        const auto& P = poly[i];
        const auto& Q = poly[(i + 1) % poly.size()];
        inside = (Q[0] - P[0]) * (y - P[1]) - (Q[1] - P[1]) * (x - P[0]) <= 0.0;
      }
    }
    if (inside) best = std::min(best, value(x, y));
  }
  return best;
}

}  // namespace

double brute_force_min_separation(const PLMap& h, const EdgeMetric& g, double cutoff) {
  const SimplicialComplex& dom = h.domain();
  if (dom.dimension() > 1) throw FormError("separation oracle supports graph domains only");
  const auto& edges = dom.edges();
  const int n = dom.vertex_count();

  std::vector<double> len(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    Edge root;
    double tu, tv;
    if (!h.carrier().root_edge_of(edges[i].a, edges[i].b, root, tu, tv))
      throw FormError("child edge not carried by a root edge");
    const double e = g.energy(root);
    const double root_len = e == 0.0 ? 1.0 : std::sqrt(std::abs(e));
    len[i] = std::abs(tv - tu) * root_len;
  }

  // All-pairs intrinsic distances between child vertices.
  std::vector<std::vector<double>> D(n, std::vector<double>(n, kInf));
  for (VertexId s = 0; s < n; ++s) {
    auto& dist = D[s];
    using Entry = std::pair<double, VertexId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
    dist[s] = 0.0;
    pq.push({0.0, s});
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u]) continue;
      for (int ei : dom.incident_edges(u)) {
        const VertexId w = edges[ei].a == u ? edges[ei].b : edges[ei].a;
        if (d + len[ei] < dist[w]) {
          dist[w] = d + len[ei];
          pq.push({dist[w], w});
        }
      }
    }
  }

  double best = kInf;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    for (std::size_t j = i; j < edges.size(); ++j) {
      const Edge& A = edges[i];
      const Edge& B = edges[j];
      const double l1 = len[i];
      const double l2 = len[j];
      if (!(l1 > 0.0) || !(l2 > 0.0)) continue;
      // x = A.a + (alpha / l1)(A.b - A.a), y likewise with beta on B.
      const Eigen::VectorXd u = (h.image(A.b) - h.image(A.a)) / l1;
      const Eigen::VectorXd v = (h.image(B.b) - h.image(B.a)) / l2;
      const Eigen::VectorXd w = h.image(A.a) - h.image(B.a);

      // Route through endpoint choices: alpha or l1 - alpha, then D, then beta or l2 - beta.
      std::vector<HalfPlane> far;
      for (int ea = 0; ea < 2; ++ea) {
        for (int eb = 0; eb < 2; ++eb) {
          const VertexId pa = ea == 0 ? A.a : A.b;
          const VertexId pb = eb == 0 ? B.a : B.b;
          const double dd = D[pa][pb];
          if (dd == kInf) continue;
          // (ea ? l1 - x : x) + dd + (eb ? l2 - y : y) >= cutoff
          const double ca = ea == 0 ? 1.0 : -1.0;
          const double cb = eb == 0 ? 1.0 : -1.0;
          const double constant = dd + (ea ? l1 : 0.0) + (eb ? l2 : 0.0);
          far.push_back({ca, cb, cutoff - constant});
        }
      }
      const Polygon box{{0.0, 0.0}, {l1, 0.0}, {l1, l2}, {0.0, l2}};
      std::vector<Polygon> pieces;
      if (i == j) {
        pieces.push_back(clip(box, {1.0, -1.0, cutoff}));
        pieces.push_back(clip(box, {-1.0, 1.0, cutoff}));
      } else {
        pieces.push_back(box);
      }
      for (auto& piece : pieces) {
        for (const auto& hp : far) {
          if (piece.empty()) break;
          piece = clip(piece, hp);
        }
        best = std::min(best, min_over_polygon(piece, w, u, v));
      }
    }
  }

  // Isolated vertices sit at infinite intrinsic distance from everything else.
  for (VertexId p = 0; p < n; ++p) {
    if (!dom.incident_edges(p).empty()) continue;
    for (const Edge& e : edges)
      best = std::min(best, point_segment_distance(h.image(p), h.image(e.a), h.image(e.b)));
    for (VertexId q = p + 1; q < n; ++q)
      if (dom.incident_edges(q).empty()) best = std::min(best, (h.image(p) - h.image(q)).norm());
  }
  return best;
}

}  // namespace imp
