#include "catch_amalgamated.hpp"

#include <queue>

#include "imp/engine1d.hpp"
#include "imp/pipeline.hpp"
#include "imp/verify.hpp"
#include "support.hpp"

using namespace imp;
using namespace imp::testing;
using Catch::Approx;

namespace {

// The polyline as a map on a subdivision of a single edge.
PLMap polyline_map(const Polyline& p, MinkowskiSignature sig) {
  const auto X = SimplicialComplex::from_dense(2, {{0, 1}});
  std::vector<double> breaks(p.params.begin() + 1, p.params.end() - 1);
  const auto s = subdivide_edges_at(X, {{Edge{0, 1}, breaks}});
  std::vector<Eigen::VectorXd> images(s.complex.vertex_count());
  images[0] = p.points.front();
  images[1] = p.points.back();
  const auto& chain = s.chains.at(Edge{0, 1});
  for (std::size_t i = 0; i < chain.size(); ++i) images[chain[i]] = p.points[i + 1];
  return PLMap(std::make_shared<SimplicialComplex>(s.complex), std::make_shared<CarrierMap>(s.carrier), sig,
               std::move(images));
}

double orient(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  return (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
}

// Planar crossing oracle for graphs in general position.
bool planar_crossing(const std::vector<Eigen::Vector2d>& pts, const std::vector<Edge>& edges) {
  for (std::size_t i = 0; i < edges.size(); ++i)
    for (std::size_t j = i + 1; j < edges.size(); ++j) {
      const Edge e = edges[i], f = edges[j];
      if (e.a == f.a || e.a == f.b || e.b == f.a || e.b == f.b) continue;
      const double o1 = orient(pts[e.a], pts[e.b], pts[f.a]), o2 = orient(pts[e.a], pts[e.b], pts[f.b]);
      const double o3 = orient(pts[f.a], pts[f.b], pts[e.a]), o4 = orient(pts[f.a], pts[f.b], pts[e.b]);
      if (o1 * o2 < 0 && o3 * o4 < 0) return true;
    }
  return false;
}

Eigen::MatrixXd random_rotation(Rng& rng, int n) {
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = uniform(rng, -1, 1);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
}

double domain_length(const EdgeMetric& g, Edge e) {
  const double l = std::abs(signed_length(g.energy(e)));
  return l > 0 ? l : 1.0;
}

// Sampled counterpart of the minimum separation: random points on the graph,
// intrinsic distances through all-pairs shortest paths.
double sampled_separation(Rng& rng, const PLMap& f, const EdgeMetric& g, double cutoff, int count) {
  const auto& X = f.domain();
  const int n = X.vertex_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> D(n, std::vector<double>(n, inf));
  for (int v = 0; v < n; ++v) D[v][v] = 0;
  for (const Edge& e : X.edges()) D[e.a][e.b] = D[e.b][e.a] = std::min(D[e.a][e.b], domain_length(g, e));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) D[i][j] = std::min(D[i][j], D[i][k] + D[k][j]);

  struct Sample {
    int edge;
    double t;
    Eigen::VectorXd x;
  };
  std::vector<Sample> s;
  const auto& edges = X.edges();
  for (int i = 0; i < count; ++i) {
    const int k = uniform_int(rng, 0, static_cast<int>(edges.size()) - 1);
    const double t = uniform(rng, 0, 1);
    s.push_back({k, t, (1 - t) * f.image(edges[k].a) + t * f.image(edges[k].b)});
  }
  double best = inf;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Edge e = edges[s[i].edge];
    const double le = domain_length(g, e);
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      const double sep = (s[i].x - s[j].x).norm();
      if (sep >= best) continue;
      const Edge h = edges[s[j].edge];
      const double lh = domain_length(g, h);
      const double ea[2] = {s[i].t * le, (1 - s[i].t) * le};
      const double ha[2] = {s[j].t * lh, (1 - s[j].t) * lh};
      const int ev[2] = {e.a, e.b}, hv[2] = {h.a, h.b};
      double d = inf;
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) d = std::min(d, ea[p] + D[ev[p]][hv[q]] + ha[q]);
      if (s[i].edge == s[j].edge) d = std::min(d, std::abs(s[i].t - s[j].t) * le);
      if (d >= cutoff) best = sep;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("an affine isometric segment passes with zero error") {
  const auto X = SimplicialComplex::from_dense(2, {{0, 1}});
  const auto h = PLMap::on(X, {2, 1}, {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(2, 1, 1)});
  const auto r = verify_isometry(h, EdgeMetric::on(X, std::vector{4.0}));
  CHECK(r.pass);
  CHECK(r.max_relative_error == 0.0);
  CHECK(r.edges_checked == 1);
}

TEST_CASE("the 3-4-5 sawtooth is exact and a nudged one is not") {
  const auto p = sawtooth_edge(Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 0), 5.0, 2, Eigen::Vector2d(0, 1));
  const auto X = SimplicialComplex::from_dense(2, {{0, 1}});
  const auto g = EdgeMetric::on(X, std::vector{25.0});
  const auto r = verify_isometry(polyline_map(p, {2, 0}), g);
  CHECK(r.pass);
  CHECK(r.max_relative_error < 1e-12);

  auto q = p;
  q.points[1][1] += 1e-3;
  const auto bad = verify_isometry(polyline_map(q, {2, 0}), g);
  CHECK_FALSE(bad.pass);
  CHECK(bad.worst_child.has_value());
  CHECK(bad.worst_parent == Simplex{0, 1});
}

TEST_CASE("energy check is invariant under block rotations") {
  Rng rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const auto X = random_graph(rng, 8);
    PipelineRequest req;
    req.f = PLMap::on(X, {1, 1}, random_images(rng, X.vertex_count(), 2, 1.0));
    req.g = random_indefinite_metric(rng, X);
    req.mode = Mode::isometry;
    req.epsilon = {0.3};
    const auto h = run_pipeline(req).h;
    // Lift into R^{2,2} by padding, then rotate each block.
    const auto P = random_rotation(rng, 2), N = random_rotation(rng, 2);
    std::vector<Eigen::VectorXd> images;
    for (const auto& x : h.images()) {
      Eigen::VectorXd y(4);
      y << P * Eigen::Vector2d(x[0], 0), N * Eigen::Vector2d(x[1], 0);
      images.push_back(y);
    }
    const auto r = verify_isometry(h.with_images({2, 2}, images), req.g);
    CHECK(r.pass);
    CHECK(r.max_relative_error < 1e-9);
  }
}

TEST_CASE("embedding check examples") {
  const auto L = SimplicialComplex::from_dense(4, {{0, 1}, {1, 2}, {2, 3}});
  const auto path = PLMap::on(L, {2, 0},
                              {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1), Eigen::Vector2d(2, 1)});
  CHECK(verify_embedding(path).pass);

  const auto X = SimplicialComplex::from_dense(4, {{0, 1}, {2, 3}});
  const auto cross = PLMap::on(X, {2, 0},
                               {Eigen::Vector2d(-1, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, -1), Eigen::Vector2d(0, 1)});
  const auto r = verify_embedding(cross);
  CHECK_FALSE(r.pass);
  REQUIRE(r.offending);
  CHECK(r.offending->first == Edge{0, 1});
  CHECK(r.offending->second == Edge{2, 3});

  // Folding back over the previous segment.
  const auto fold = PLMap::on(L, {2, 0},
                              {Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1)});
  CHECK_FALSE(verify_embedding(fold).pass);
}

TEST_CASE("collapsed zero-energy edges are tolerated only with the metric") {
  const auto X = SimplicialComplex::from_dense(3, {{0, 1}, {1, 2}});
  const auto h = PLMap::on(X, {2, 1},
                           {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0)});
  CHECK_FALSE(verify_embedding(h).pass);
  const auto g = EdgeMetric::on(X, std::vector{0.0, 1.0});
  CHECK(verify_embedding(h, std::nullopt, &g).pass);
}

TEST_CASE("embedding check agrees with a planar crossing oracle") {
  Rng rng(52);
  int crossed = 0, clean = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const auto X = random_graph(rng, 20);
    std::vector<Eigen::Vector2d> pts;
    std::vector<Eigen::VectorXd> images;
    for (int v = 0; v < X.vertex_count(); ++v) {
      pts.emplace_back(uniform(rng, -1, 1), uniform(rng, -1, 1));
      images.push_back(Eigen::Vector3d(pts.back().x(), pts.back().y(), 0));
    }
    const bool expected = !planar_crossing(pts, X.edges());
    CHECK(verify_embedding(PLMap::on(X, {2, 1}, images)).pass == expected);
    (expected ? clean : crossed)++;
  }
  CHECK(crossed > 0);
  CHECK(clean > 0);
}

TEST_CASE("a pipeline output in R^{1,2} embeds") {
  Rng rng(53);
  const auto X = SimplicialComplex::from_dense(
      7, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {0, 6}, {0, 3}, {1, 5}, {2, 6}});
  PipelineRequest req;
  req.f = PLMap::on(X, {1, 2}, random_images(rng, 7, 3, 1.0));
  req.g = random_indefinite_metric(rng, X);
  req.epsilon = {0.3};
  const auto h = run_pipeline(req).h;
  CHECK(verify_embedding(h, std::nullopt, &req.g).pass);
}

TEST_CASE("closeness of a map to itself is zero") {
  Rng rng(54);
  const auto X = random_graph(rng, 10);
  const auto f = PLMap::on(X, {2, 1}, random_images(rng, X.vertex_count(), 3, 1.0));
  const auto shells = shell_decomposition(X, 0);
  const std::vector<double> eps{0.1};
  const auto r = verify_closeness(f, f, shells, eps);
  CHECK(r.pass);
  for (double d : r.sup_deviation) CHECK(d == 0.0);
  CHECK(r.epsilon.size() == shells.shells.size());
}

TEST_CASE("closeness of a tooth over a constant map") {
  Polyline p;
  p.params = {0, 0.5, 1};
  p.points = {Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1.3), Eigen::Vector2d(1, 1)};
  const auto h = polyline_map(p, {2, 0});
  const auto X = SimplicialComplex::from_dense(2, {{0, 1}});
  const auto f = PLMap::on(X, {2, 0}, {Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1)});
  const auto r = verify_closeness(f, h, shell_decomposition(X, 0), std::vector{0.5});
  CHECK(r.sup_deviation[0] == Approx(0.3).epsilon(1e-12));
  CHECK(r.pass);
  CHECK_FALSE(verify_closeness(f, h, shell_decomposition(X, 0), std::vector{0.3}).pass);
}

TEST_CASE("closeness rejects mismatched input") {
  const auto X = SimplicialComplex::from_dense(2, {{0, 1}});
  const auto f = PLMap::on(X, {2, 0}, {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)});
  const auto g = PLMap::on(X, {1, 1}, {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)});
  CHECK_THROWS(verify_closeness(f, g, shell_decomposition(X, 0), std::vector{0.5}));
}

TEST_CASE("denser closeness grids never report less") {
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const auto X = random_graph(rng, 8);
    auto [g, images] = random_short_instance(rng, X, 2, 1.0);
    const auto f = PLMap::on(X, {2, 0}, images);
    const auto shells = shell_decomposition(X, 0);
    const std::vector<double> eps(shells.shells.size(), 0.3);
    const auto h = positive_engine(EngineRequest{f, g, 0, eps, std::nullopt, {}}).output;
    std::vector<double> previous(shells.shells.size(), 0.0);
    for (int n : {2, 3, 5, 9, 17, 33}) {
      const auto r = verify_closeness(f, h, shells, eps, n);
      for (std::size_t k = 0; k < previous.size(); ++k) CHECK(r.sup_deviation[k] >= previous[k]);
      previous = r.sup_deviation;
    }
  }
}

TEST_CASE("minimum separation examples") {
  const auto X = SimplicialComplex::from_dense(4, {{0, 1}, {2, 3}});
  const auto h = PLMap::on(X, {2, 0},
                           {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), Eigen::Vector2d(1, 1)});
  CHECK(brute_force_min_separation(h, EdgeMetric::on(X, std::vector{1.0, 1.0}), 1.5) == Approx(1.0));
  CHECK(brute_force_min_separation(h, EdgeMetric::on(X, std::vector{1.0, 1.0}), 0.5) == Approx(0.5));

  const auto E = SimplicialComplex::from_dense(2, {{0, 1}});
  const auto s = PLMap::on(E, {2, 0}, {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)});
  CHECK(std::isinf(brute_force_min_separation(s, EdgeMetric::on(E, std::vector{1.0}), 2.0)));
}

TEST_CASE("minimum separation against random sampling") {
  Rng rng(56);
  for (int trial = 0; trial < 5; ++trial) {
    const auto X = SimplicialComplex::from_dense(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}});
    const auto f = PLMap::on(X, {2, 1}, random_images(rng, 4, 3, 1.0));
    const auto g = random_indefinite_metric(rng, X);
    const double cutoff = 0.5;
    const double exact = brute_force_min_separation(f, g, cutoff);
    const double sampled = sampled_separation(rng, f, g, cutoff, 10000);
    CHECK(exact <= sampled * (1 + 1e-12));
    CHECK(sampled <= exact * 1.05 + 1e-9);
  }
}
