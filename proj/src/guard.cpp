#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "imp/pipeline.hpp"

namespace imp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Closest distance between segments [p0,p1] and [q0,q1], clamped
// closest-point parametrization.
double segment_gap(const Eigen::VectorXd& p0, const Eigen::VectorXd& p1, const Eigen::VectorXd& q0,
                   const Eigen::VectorXd& q1) {
  const Eigen::VectorXd d1 = p1 - p0;
  const Eigen::VectorXd d2 = q1 - q0;
  const Eigen::VectorXd r = p0 - q0;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0;
  double t = 0.0;
  if (a == 0.0 && e == 0.0) return r.norm();
  if (a == 0.0) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e == 0.0) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return (p0 + s * d1 - q0 - t * d2).norm();
}

double point_gap(const Eigen::VectorXd& x, const Eigen::VectorXd& q0, const Eigen::VectorXd& q1) {
  return segment_gap(x, x, q0, q1);
}

// min |a u - b v| over the box [0,l1]x[0,l2] cut by a + b >= cut. The
// unconstrained minimum sits at the origin, which the cut excludes, so the
// boundary of the clipped polygon suffices.
double adjacent_gap(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double l1, double l2, double cut) {
  std::vector<std::array<double, 2>> box{{0.0, 0.0}, {l1, 0.0}, {l1, l2}, {0.0, l2}};
  std::vector<std::array<double, 2>> poly;
  for (std::size_t i = 0; i < box.size(); ++i) {
    const auto& P = box[i];
    const auto& Q = box[(i + 1) % box.size()];
    const double fp = P[0] + P[1] - cut;
    const double fq = Q[0] + Q[1] - cut;
    if (fp >= 0.0) poly.push_back(P);
    if ((fp >= 0.0) != (fq >= 0.0)) {
      const double t = fp / (fp - fq);
      poly.push_back({P[0] + t * (Q[0] - P[0]), P[1] + t * (Q[1] - P[1])});
    }
  }
  double best = kInf;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& P = poly[i];
    const auto& Q = poly[(i + 1) % poly.size()];
    const Eigen::VectorXd r0 = P[0] * u - P[1] * v;
    const Eigen::VectorXd r1 = (Q[0] - P[0]) * u - (Q[1] - P[1]) * v;
    const double rr = r1.squaredNorm();
    const double t = rr > 0.0 ? std::clamp(-r0.dot(r1) / rr, 0.0, 1.0) : 0.0;
    best = std::min(best, (r0 + t * r1).norm());
  }
  return best;
}

double domain_length(const EdgeMetric& g, Edge e) {
  const double energy = g.energy(e);
  return energy == 0.0 ? 1.0 : std::sqrt(std::abs(energy));
}

double unit_uniform(std::mt19937_64& rng) {
  // Fixed mapping so results do not depend on the standard library's
  // distribution implementation.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

CoordinateSplit split_coordinates(const PLMap& f, int n) {
  const MinkowskiSignature sig = f.signature();
  if (n < 1) throw PipelineError("intrinsic dimension must be positive");
  if (sig.p < n || sig.q < n)
    throw PipelineError("target R^{" + std::to_string(sig.p) + "," + std::to_string(sig.q) +
                        "} has too few coordinates to split off " + std::to_string(n) + " positive and negative ones");
  std::vector<MinkowskiSignature> blocks{{n, 0}};
  const bool has_star = sig.p + sig.q > 2 * n;
  if (has_star) blocks.push_back({sig.p - n, sig.q - n});
  blocks.push_back({0, n});
  std::vector<PLMap> parts = split_map(f, blocks);
  CoordinateSplit out{parts.front(), std::nullopt, parts.back()};
  if (has_star) out.star = parts[1];
  return out;
}

Perturbation perturb_general_position(const PLMap& f, std::span<const double> caps, std::uint64_t seed,
                                      std::span<const Predicate> predicates, std::span<const int> coordinates) {
  const int vc = f.domain().vertex_count();
  if (static_cast<int>(caps.size()) != vc) throw PipelineError("perturbation caps must match the vertex count");
  auto all_pass = [&](const PLMap& m) {
    return std::all_of(predicates.begin(), predicates.end(), [&](const Predicate& p) { return p(m); });
  };
  if (all_pass(f)) return {f, 0.0, 1};

  std::vector<int> coords(coordinates.begin(), coordinates.end());
  if (coords.empty())
    for (int i = 0; i < f.signature().dimension(); ++i) coords.push_back(i);
  const double per_coord = 1.0 / std::sqrt(static_cast<double>(coords.size()));

  std::mt19937_64 rng(seed);
  double scale = 1.0;
  for (int attempt = 0; attempt < 32; ++attempt, scale *= 0.5) {
    std::vector<Eigen::VectorXd> images = f.images();
    for (int v = 0; v < vc; ++v) {
      for (int c : coords) images[v][c] += (2.0 * unit_uniform(rng) - 1.0) * caps[v] * scale * per_coord;
    }
    PLMap candidate = f.with_images(f.signature(), std::move(images));
    if (all_pass(candidate)) return {std::move(candidate), scale, attempt + 2};
  }
  throw PipelineError("general-position perturbation failed after 32 retries");
}

EdgeMetric construct_H(const EdgeMetric& g, const EdgeMetric& gf, double margin) {
  if (!(margin > 0.0)) throw PipelineError("H margin must be positive");
  if (g.size() != gf.size()) throw PipelineError("metric and induced metric have different edge sets");
  std::map<Edge, double> out;
  for (const auto& [e, eg] : g.energies()) {
    if (!gf.has(e)) throw PipelineError("induced metric lacks an edge of the prescribed metric");
    const double ef = gf.energy(e);
    out.emplace(e, std::min(eg, ef) - margin * (1.0 + std::abs(eg) + std::abs(ef)));
  }
  return EdgeMetric(std::move(out));
}

EmbeddingGuard compute_guard(const PLMap& f, const EdgeMetric& g, VertexId base, std::span<const double> epsilon,
                             GuardRule rule) {
  if (epsilon.empty()) throw PipelineError("empty epsilon schedule");
  const SimplicialComplex& X = f.domain();
  if (X.dimension() > 1) throw PipelineError("the guard is defined for graphs only");
  g.check_covers(X);

  {
    std::vector<const Eigen::VectorXd*> sorted;
    for (const auto& x : f.images()) sorted.push_back(&x);
    std::sort(sorted.begin(), sorted.end(), [](const Eigen::VectorXd* a, const Eigen::VectorXd* b) {
      return std::lexicographical_compare(a->data(), a->data() + a->size(), b->data(), b->data() + b->size());
    });
    for (std::size_t i = 1; i < sorted.size(); ++i)
      if (*sorted[i] == *sorted[i - 1]) throw PipelineError("f is not injective on vertices");
  }

  const ShellDecomposition shells = shell_decomposition(X, base);
  const std::size_t K = shells.shells.size();
  EmbeddingGuard guard;
  guard.delta.assign(K, kInf);
  guard.mu.assign(K, kInf);
  guard.edge_mu.assign(X.edges().size(), kInf);

  struct Item {
    VertexId u, v;  // u == v for isolated vertices
    std::size_t shell;
    double length;
    int edge;  // -1 for isolated vertices
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i < X.edges().size(); ++i) {
    const Edge& e = X.edges()[i];
    const std::size_t k = shells.shell_of({e.a, e.b});
    const double len = domain_length(g, e);
    items.push_back({e.a, e.b, k, len, static_cast<int>(i)});
    guard.delta[k] = std::min(guard.delta[k], len / 2.0);
  }
  for (VertexId v = 0; v < X.vertex_count(); ++v)
    if (X.incident_edges(v).empty()) items.push_back({v, v, shells.shell_of({v}), 0.0, -1});

  auto record_shell = [&](std::size_t k, double sep) { guard.mu[k] = std::min(guard.mu[k], sep); };
  auto record = [&](const Item& it, double sep) {
    record_shell(it.shell, sep);
    if (it.edge >= 0) guard.edge_mu[it.edge] = std::min(guard.edge_mu[it.edge], sep);
  };

  for (std::size_t i = 0; i < items.size(); ++i) {
    const Item& A = items[i];
    const Eigen::VectorXd& a0 = f.image(A.u);
    const Eigen::VectorXd& a1 = f.image(A.v);
    if (rule == GuardRule::lebesgue && A.u != A.v) {
      const double cut = guard.delta[A.shell];
      if (cut <= A.length) record(A, (a1 - a0).norm() * cut / A.length);
    }
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      const Item& B = items[j];
      const Eigen::VectorXd& b0 = f.image(B.u);
      const Eigen::VectorXd& b1 = f.image(B.v);
      VertexId shared = -1;
      if (A.u != A.v && B.u != B.v) {
        if (A.u == B.u || A.u == B.v) shared = A.u;
        else if (A.v == B.u || A.v == B.v) shared = A.v;
      }
      if (shared < 0) {
        const double sep = segment_gap(a0, a1, b0, b1);
        record(A, sep);
        record(B, sep);
        continue;
      }
      const VertexId fa = A.u == shared ? A.v : A.u;
      const VertexId fb = B.u == shared ? B.v : B.u;
      const Eigen::VectorXd& w = f.image(shared);
      if (rule == GuardRule::structural) {
        const double sep = std::min(point_gap(f.image(fa), w, f.image(fb)), point_gap(f.image(fb), w, f.image(fa)));
        record(A, sep);
        record(B, sep);
        continue;
      }
      const Eigen::VectorXd u = (f.image(fa) - w) / A.length;
      const Eigen::VectorXd v = (f.image(fb) - w) / B.length;
      for (std::size_t k : {A.shell, B.shell}) {
        const double cut = guard.delta[k];
        if (cut < A.length + B.length) {
          const double sep = adjacent_gap(u, v, A.length, B.length, cut);
          record_shell(k, sep);
          if (k == A.shell) guard.edge_mu[A.edge] = std::min(guard.edge_mu[A.edge], sep);
          if (k == B.shell) guard.edge_mu[B.edge] = std::min(guard.edge_mu[B.edge], sep);
        }
        if (A.shell == B.shell) break;
      }
    }
  }

  guard.epsilon_eff.resize(K);
  for (std::size_t k = 0; k < K; ++k)
    guard.epsilon_eff[k] = std::min(epsilon[std::min(k, epsilon.size() - 1)], guard.mu[k] / 3.0);
  guard.edge_epsilon_eff.resize(X.edges().size());
  for (std::size_t i = 0; i < X.edges().size(); ++i) {
    const std::size_t k = items[i].shell;
    guard.edge_epsilon_eff[i] = std::min(epsilon[std::min(k, epsilon.size() - 1)], guard.edge_mu[i] / 3.0);
  }
  return guard;
}

bool is_injective(const PLMap& f, double slack) {
  const SimplicialComplex& X = f.domain();
  if (X.dimension() > 1) throw PipelineError("injectivity test is defined for graphs only");
  const auto& edges = X.edges();
  for (const Edge& e : edges)
    if ((f.image(e.b) - f.image(e.a)).norm() <= slack) return false;
  std::vector<VertexId> isolated;
  for (VertexId v = 0; v < X.vertex_count(); ++v)
    if (X.incident_edges(v).empty()) isolated.push_back(v);
  for (std::size_t i = 0; i < isolated.size(); ++i) {
    for (std::size_t j = i + 1; j < isolated.size(); ++j)
      if ((f.image(isolated[i]) - f.image(isolated[j])).norm() <= slack) return false;
    for (const Edge& e : edges)
      if (point_gap(f.image(isolated[i]), f.image(e.a), f.image(e.b)) <= slack) return false;
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& A = edges[i];
    for (std::size_t j = i + 1; j < edges.size(); ++j) {
      const Edge& B = edges[j];
      VertexId shared = -1;
      if (A.a == B.a || A.a == B.b) shared = A.a;
      else if (A.b == B.a || A.b == B.b) shared = A.b;
      if (shared < 0) {
        if (segment_gap(f.image(A.a), f.image(A.b), f.image(B.a), f.image(B.b)) <= slack) return false;
        continue;
      }
      const VertexId fa = A.a == shared ? A.b : A.a;
      const VertexId fb = B.a == shared ? B.b : B.a;
      const Eigen::VectorXd& w = f.image(shared);
      if (point_gap(f.image(fa), w, f.image(fb)) <= slack || point_gap(f.image(fb), w, f.image(fa)) <= slack)
        return false;
    }
  }
  return true;
}

bool is_local_embedding(const PLMap& f, std::span<const int> coordinates) {
  const SimplicialComplex& X = f.domain();
  const auto& edges = X.edges();
  auto project = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd out(coordinates.size());
    for (std::size_t i = 0; i < coordinates.size(); ++i) out[i] = x[coordinates[i]];
    return out;
  };
  for (VertexId w = 0; w < X.vertex_count(); ++w) {
    const auto& inc = X.incident_edges(w);
    const Eigen::VectorXd pw = project(f.image(w));
    const double scale = 1.0 + pw.norm();
    std::vector<Eigen::VectorXd> dirs;
    for (int ei : inc) {
      const VertexId o = edges[ei].a == w ? edges[ei].b : edges[ei].a;
      Eigen::VectorXd d = project(f.image(o)) - pw;
      const double n = d.norm();
      if (!(n > 1e-12 * scale)) return false;
      dirs.push_back(d / n);
    }
    for (std::size_t i = 0; i < dirs.size(); ++i)
      for (std::size_t j = i + 1; j < dirs.size(); ++j)
        if (dirs[i].dot(dirs[j]) > 1.0 - 1e-12) return false;
  }
  return true;
}

}  // namespace imp
