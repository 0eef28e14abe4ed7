#pragma once

// Random instance generators shared by the unit tests and the acceptance run.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "imp/complex.hpp"
#include "imp/forms.hpp"

namespace imp::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline int uniform_int(Rng& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

/// Random graph with at most `max_edges` edges and at least one edge.
/// Occasionally disconnected, occasionally with isolated vertices.
inline SimplicialComplex random_graph(Rng& rng, int max_edges) {
  const int n = uniform_int(rng, 2, std::max(2, std::min(12, max_edges + 1)));
  const int max_possible = n * (n - 1) / 2;
  const int m = uniform_int(rng, 1, std::min(max_edges, max_possible));
  std::set<std::pair<int, int>> edges;
  // A spanning path on a random prefix keeps most instances connected.
  const int path_len = uniform_int(rng, 1, n - 1);
  for (int i = 0; i < path_len && static_cast<int>(edges.size()) < m; ++i) edges.insert({i, i + 1});
  while (static_cast<int>(edges.size()) < m) {
    int a = uniform_int(rng, 0, n - 1);
    int b = uniform_int(rng, 0, n - 1);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    edges.insert({a, b});
  }
  std::vector<Simplex> simplices;
  for (int v = 0; v < n; ++v) simplices.push_back({v});
  for (auto [a, b] : edges) simplices.push_back({a, b});
  return SimplicialComplex::from_dense(n, simplices);
}

/// Random complex of dimension up to 3 built from random simplices.
inline SimplicialComplex random_complex(Rng& rng) {
  const int n = uniform_int(rng, 1, 9);
  const int count = uniform_int(rng, 1, 8);
  std::vector<Simplex> simplices;
  for (int v = 0; v < n; ++v)
    if (uniform(rng, 0, 1) < 0.3) simplices.push_back({v});
  for (int i = 0; i < count; ++i) {
    const int k = uniform_int(rng, 1, std::min(4, n));
    std::vector<int> all(n);
    for (int v = 0; v < n; ++v) all[v] = v;
    std::shuffle(all.begin(), all.end(), rng);
    Simplex s(all.begin(), all.begin() + k);
    std::sort(s.begin(), s.end());
    simplices.push_back(s);
  }
  for (int v = 0; v < n; ++v) simplices.push_back({v});
  return SimplicialComplex::from_dense(n, simplices);
}

inline std::vector<Eigen::VectorXd> random_images(Rng& rng, int count, int dim, double half_width) {
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd x(dim);
    for (int c = 0; c < dim; ++c) x[c] = uniform(rng, -half_width, half_width);
    out.push_back(std::move(x));
  }
  return out;
}

/// Energies drawn from {positive, negative, zero}.
inline EdgeMetric random_indefinite_metric(Rng& rng, const SimplicialComplex& X) {
  std::vector<double> e;
  for (std::size_t i = 0; i < X.edges().size(); ++i) {
    const double r = uniform(rng, 0, 1);
    if (r < 0.15) e.push_back(0.0);
    else if (r < 0.55) e.push_back(signed_square(uniform(rng, 0.2, 2.0)));
    else e.push_back(-signed_square(uniform(rng, 0.2, 2.0)));
  }
  return EdgeMetric::on(X, e);
}

/// Definite metric (sign +1 or -1) together with a map into a Euclidean
/// block of dimension `dim` that is short for it: every image segment is at
/// most as long as the prescribed length, some strictly shorter.
inline std::pair<EdgeMetric, std::vector<Eigen::VectorXd>> random_short_instance(Rng& rng,
                                                                                  const SimplicialComplex& X, int dim,
                                                                                  double sign) {
  std::vector<double> lengths;
  for (std::size_t i = 0; i < X.edges().size(); ++i) lengths.push_back(uniform(rng, 0.2, 2.0));
  std::vector<Eigen::VectorXd> images = random_images(rng, X.vertex_count(), dim, 1.0);
  double s = 1.0;
  for (std::size_t i = 0; i < X.edges().size(); ++i) {
    const Edge& e = X.edges()[i];
    const double d = (images[e.b] - images[e.a]).norm();
    if (d > 0.0) s = std::min(s, lengths[i] / d);
  }
  s *= uniform(rng, 0.3, 1.0);
  for (auto& x : images) x *= s;
  std::vector<double> energies;
  for (double l : lengths) energies.push_back(sign * l * l);
  return {EdgeMetric::on(X, energies), std::move(images)};
}

inline std::vector<double> random_schedule(Rng& rng, std::size_t shells, double lo, double hi) {
  std::vector<double> eps;
  for (std::size_t k = 0; k < shells; ++k) eps.push_back(uniform(rng, lo, hi));
  return eps;
}

}  // namespace imp::testing
