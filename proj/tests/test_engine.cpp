#include "catch_amalgamated.hpp"

#include "imp/engine1d.hpp"
#include "imp/verify.hpp"
#include "support.hpp"

using namespace imp;
using namespace imp::testing;
using Catch::Approx;

namespace {

double segment_length(const Polyline& p, std::size_t i) { return (p.points[i + 1] - p.points[i]).norm(); }

// Largest distance from the straight constant-speed parametrization of ab.
double drift(const Polyline& p) {
  const Eigen::VectorXd a = p.points.front(), b = p.points.back();
  double worst = 0;
  for (std::size_t i = 0; i < p.points.size(); ++i)
    worst = std::max(worst, (p.points[i] - (a + p.params[i] * (b - a))).norm());
  return worst;
}

EngineRequest single_edge(MinkowskiSignature sig, Eigen::VectorXd a, Eigen::VectorXd b, double energy, double eps) {
  const auto X = SimplicialComplex::from_dense(2, {{0, 1}});
  return EngineRequest{PLMap::on(X, sig, {std::move(a), std::move(b)}), EdgeMetric::on(X, std::vector{energy}), 0,
                       {eps}, std::nullopt, {}};
}

// Total Euclidean length of the output along one parent edge.
double arc_length(const EngineResult& r, Edge parent) {
  double total = 0;
  for (const Edge& e : r.output.domain().edges()) {
    Edge root;
    double tu, tv;
    if (r.carrier.root_edge_of(e.a, e.b, root, tu, tv) && root == parent)
      total += (r.output.image(e.b) - r.output.image(e.a)).norm();
  }
  return total;
}

}  // namespace

TEST_CASE("3-4-5 sawtooth") {
  const auto p = sawtooth_edge(Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 0), 5.0, 2, Eigen::Vector2d(0, 1));
  CHECK(sawtooth_amplitude(3, 5, 2) == 1.0);
  REQUIRE(p.segments() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(segment_length(p, i) == 1.25);
  CHECK(p.length() == 5.0);
  CHECK(p.points[1] == Eigen::VectorXd(Eigen::Vector2d(0.75, 1.0)));
  CHECK(p.points[2] == Eigen::VectorXd(Eigen::Vector2d(1.5, 0.0)));
  CHECK(drift(p) <= 1.0 + 1e-15);
}

TEST_CASE("sawtooth on an isometric segment is straight") {
  const auto p = sawtooth_edge(Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 4), 5.0, 3, Eigen::Vector2d(-0.8, 0.6));
  CHECK(sawtooth_amplitude(5, 5, 3) == 0.0);
  CHECK(p.length() == Approx(5.0).epsilon(1e-15));
  CHECK(drift(p) < 1e-15);
}

TEST_CASE("sawtooth on a collapsed base is one tooth out and back") {
  const auto p = sawtooth_edge(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1), 2.0, 1, Eigen::Vector2d(0, 1));
  REQUIRE(p.segments() == 2);
  CHECK(p.points[1] == Eigen::VectorXd(Eigen::Vector2d(1, 2)));
  CHECK(p.length() == 2.0);
}

TEST_CASE("sawtooth rejects bad input") {
  const Eigen::Vector2d a(0, 0), b(3, 0), n(0, 1);
  CHECK_THROWS_AS(sawtooth_edge(a, b, 2.0, 2, n), EngineError);
  CHECK_THROWS_AS(sawtooth_edge(a, b, 5.0, 2, Eigen::Vector2d(0, 0)), EngineError);
  CHECK_THROWS_AS(sawtooth_edge(a, b, 5.0, 2, Eigen::Vector2d(1, 1) / std::sqrt(2.0)), EngineError);
  CHECK_THROWS_AS(sawtooth_edge(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), 5.0, 2, Eigen::VectorXd::Ones(1)),
                  EngineError);
}

TEST_CASE("sawtooth segments are equal for random input") {
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const int dim = uniform_int(rng, 2, 4);
    const auto pts = random_images(rng, 2, dim, 2.0);
    const double d = (pts[1] - pts[0]).norm();
    const double L = d + uniform(rng, 0.0, 3.0);
    const int m = uniform_int(rng, 1, 20);
    const Eigen::VectorXd n = pick_normal(pts[1] - pts[0], {}, 0);
    const auto p = sawtooth_edge(pts[0], pts[1], L, m, n);
    REQUIRE(p.segments() == static_cast<std::size_t>(2 * m));
    for (std::size_t s = 0; s < p.segments(); ++s) CHECK(segment_length(p, s) == Approx(L / (2 * m)).epsilon(1e-12));
    CHECK(p.length() == Approx(L).epsilon(1e-12));
    CHECK(drift(p) <= sawtooth_amplitude(d, L, m) * (1 + 1e-12) + 1e-15);
  }
}

TEST_CASE("tooth count is the least m by direct enumeration") {
  // d = 3, L = 5, accuracy 0.5: amplitude 2/m plus drift 3/m falls below 1/2 first at m = 11.
  CHECK(tooth_count(3, 5, 0.5) == 11);
  CHECK(sawtooth_amplitude(3, 5, 11) == Approx(2.0 / 11));
  Rng rng(32);
  for (int i = 0; i < 300; ++i) {
    const double d = uniform(rng, 0.0, 3.0);
    const double L = d + uniform(rng, 0.0, 3.0);
    const double acc = uniform(rng, 0.05, 1.0);
    int m = 1;
    while (!(sawtooth_amplitude(d, L, m) + d / m < acc)) ++m;
    CHECK(tooth_count(d, L, acc) == m);
  }
  CHECK(tooth_count(5, 5, 10.0) == 1);
  CHECK_THROWS_AS(tooth_count(3, 5, 0.0), EngineError);
}

TEST_CASE("fold examples") {
  const auto p = fold_edge_1d(0, 3, 5, 0.5);
  CHECK(p.length() == Approx(5.0).epsilon(1e-15));
  // Two excursions, each one back move of length 0.5.
  int back = 0;
  for (std::size_t s = 0; s < p.segments(); ++s) {
    const double step = p.points[s + 1][0] - p.points[s][0];
    if (step < 0) {
      ++back;
      CHECK(-step == Approx(0.5));
    }
  }
  CHECK(back == 2);
  CHECK(drift(p) <= 0.5);

  const auto straight = fold_edge_1d(-1, 2, 3, 0.1);
  CHECK(straight.segments() == 1);

  const auto loop = fold_edge_1d(0, 0, 1, 0.25);
  CHECK(loop.length() == Approx(1.0).epsilon(1e-15));
  CHECK(drift(loop) <= 0.25);
  CHECK(loop.points.back()[0] == 0.0);

  CHECK_THROWS_AS(fold_edge_1d(0, 3, 2, 0.5), EngineError);
}

TEST_CASE("fold length and deviation on random input") {
  Rng rng(33);
  for (int i = 0; i < 300; ++i) {
    const double a = uniform(rng, -2, 2), b = uniform(rng, -2, 2);
    const double L = std::abs(b - a) + uniform(rng, 0.0, 4.0);
    const double bound = uniform(rng, 0.02, 1.0);
    const auto p = fold_edge_1d(a, b, L, bound);
    CHECK(p.length() == Approx(L).epsilon(1e-12));
    CHECK(drift(p) < bound);
    CHECK(p.points.front()[0] == a);
    CHECK(p.points.back()[0] == Approx(b).margin(1e-15));
    for (std::size_t s = 1; s < p.params.size(); ++s) CHECK(p.params[s] > p.params[s - 1]);
  }
}

TEST_CASE("pick normal examples") {
  CHECK(pick_normal(Eigen::Vector3d(1, 0, 0), {}, 0) == Eigen::VectorXd(Eigen::Vector3d(0, 1, 0)));
  CHECK(pick_normal(Eigen::Vector3d(0, 0, 1), {}, 0) == Eigen::VectorXd(Eigen::Vector3d(1, 0, 0)));
  const Eigen::VectorXd n = pick_normal(Eigen::Vector2d(1, 1) / std::sqrt(2.0), {}, 0);
  const Eigen::Vector2d expected = Eigen::Vector2d(1, -1) / std::sqrt(2.0);
  CHECK(std::abs(std::abs(n.dot(expected)) - 1.0) < 1e-15);
  CHECK_THROWS_AS(pick_normal(Eigen::VectorXd::Ones(1), {}, 0), EngineError);
}

TEST_CASE("pick normal avoids used directions and is deterministic") {
  Rng rng(34);
  for (int i = 0; i < 200; ++i) {
    const int dim = uniform_int(rng, 2, 4);
    const Eigen::VectorXd dir = random_images(rng, 1, dim, 1.0)[0];
    const Eigen::VectorXd first = pick_normal(dir, {}, 5);
    const std::vector<Eigen::VectorXd> used{first};
    if (dim == 2) {
      // The plane offers one normal line only.
      CHECK_THROWS_AS(pick_normal(dir, used, 5), EngineError);
      continue;
    }
    const Eigen::VectorXd n = pick_normal(dir, used, 5);
    CHECK(std::abs(n.norm() - 1) < 1e-12);
    CHECK(std::abs(n.dot(dir)) < 1e-12 * std::max(1.0, dir.norm()));
    CHECK(pick_normal(dir, used, 5) == n);
    CHECK((n - first).norm() > 1e-6);
  }
}

TEST_CASE("positive engine on the 3-4-5 edge") {
  const auto req = single_edge({2, 0}, Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 0), 25.0, 0.5);
  const auto r = positive_engine(req);
  CHECK(r.output.domain().edges().size() == 22);  // eleven teeth
  CHECK(arc_length(r, {0, 1}) == Approx(5.0).epsilon(1e-12));
  CHECK(verify_isometry(r.output, req.target).max_relative_error < 1e-12);
  REQUIRE(r.shell_deviation.size() == 1);
  CHECK(r.shell_deviation[0] < 0.5);
}

TEST_CASE("positive engine leaves isometric input alone") {
  const auto req = single_edge({2, 0}, Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 4), 25.0, 0.5);
  const auto r = positive_engine(req);
  CHECK(r.output.domain().edges().size() == 1);
  CHECK(r.output.images() == req.input.images());
  CHECK(r.shell_deviation[0] == 0.0);
}

TEST_CASE("positive engine on a path in E^3") {
  Rng rng(35);
  const auto X = SimplicialComplex::from_dense(4, {{0, 1}, {1, 2}, {2, 3}});
  auto [g, images] = random_short_instance(rng, X, 3, 1.0);
  const auto f = PLMap::on(X, {3, 0}, images);
  const auto shells = shell_decomposition(X, 0);
  const std::vector<double> eps(shells.shells.size(), 0.1);
  const auto r = positive_engine(EngineRequest{f, g, 0, eps, std::nullopt, {}});
  const auto er = verify_isometry(r.output, g);
  CHECK(er.pass);
  CHECK(er.max_relative_error < 1e-9);
  const auto cr = verify_closeness(f, r.output, shells, eps, 100);
  CHECK(cr.pass);
  for (double d : cr.sup_deviation) CHECK(d < 0.1);
}

TEST_CASE("positive engine folds on the line") {
  Rng rng(36);
  for (int trial = 0; trial < 50; ++trial) {
    const auto X = random_graph(rng, 8);
    auto [g, images] = random_short_instance(rng, X, 1, 1.0);
    const auto f = PLMap::on(X, {1, 0}, images);
    const auto shells = shell_decomposition(X, 0);
    const auto eps = random_schedule(rng, shells.shells.size(), 0.05, 0.5);
    const auto r = positive_engine(EngineRequest{f, g, 0, eps, std::nullopt, {}});
    CHECK(verify_isometry(r.output, g).max_relative_error < 1e-9);
    CHECK(verify_closeness(f, r.output, shells, eps, 100).pass);
  }
}

TEST_CASE("positive engine reports non-short edges") {
  const auto X = SimplicialComplex::from_dense(3, {{0, 1}, {1, 2}});
  const auto f = PLMap::on(X, {2, 0}, {Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 0), Eigen::Vector2d(3, 1)});
  const auto g = EdgeMetric::on(X, std::vector{4.0, 4.0});
  try {
    positive_engine(EngineRequest{f, g, 0, {0.5}, std::nullopt, {}});
    FAIL("expected an EngineError");
  } catch (const EngineError& e) {
    REQUIRE(e.violations().size() == 1);
    CHECK(e.violations()[0].edge == Edge{0, 1});
    // |f| = 3 against a length of 2.
    CHECK(e.violations()[0].deficit == Approx(1.0));
  }
  CHECK_THROWS_AS(positive_engine(EngineRequest{f, EdgeMetric::on(X, std::vector{16.0, 4.0}), 0, {}, std::nullopt, {}}),
                  EngineError);
}

TEST_CASE("negative engine lifts a collapsed edge") {
  const auto req = single_edge({0, 2}, Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0), -9.0, 0.5);
  const auto r = negative_engine(req);
  CHECK(arc_length(r, {0, 1}) == Approx(3.0).epsilon(1e-12));
  const auto er = verify_isometry(r.output, req.target);
  CHECK(er.pass);
  const EdgeMetric achieved = induced_edge_energies(r.output);
  CHECK(achieved.size() == r.output.domain().edges().size());
  double total = 0;
  for (const auto& [e, v] : achieved.energies()) {
    CHECK(v <= 0);
    total += std::sqrt(-v);
  }
  CHECK(total == Approx(3.0).epsilon(1e-12));
  CHECK(r.shell_deviation[0] < 0.5);
}

TEST_CASE("negative engine keeps zero targets on collapsed edges") {
  const auto req = single_edge({0, 2}, Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 2), 0.0, 0.5);
  const auto r = negative_engine(req);
  CHECK(r.output.images() == req.input.images());
}

TEST_CASE("negative engine on a constant triangle") {
  const auto X = SimplicialComplex::from_dense(3, {{0, 1}, {1, 2}, {0, 2}});
  const auto f = PLMap::on(X, {0, 2}, std::vector<Eigen::VectorXd>(3, Eigen::Vector2d(0.5, -1)));
  const auto g = EdgeMetric::on(X, std::vector{-1.0, -1.0, -1.0});
  const auto r = negative_engine(EngineRequest{f, g, 0, {0.2}, std::nullopt, {}});
  const auto er = verify_isometry(r.output, g);
  CHECK(er.pass);
  CHECK(er.max_relative_error < 1e-9);
  for (const Edge& e : X.edges()) CHECK(arc_length(r, e) == Approx(1.0).epsilon(1e-9));
  CHECK(verify_closeness(f, r.output, shell_decomposition(X, 0), std::vector{0.2}, 100).pass);
}

TEST_CASE("negative engine rejects positive targets and long edges") {
  const auto pos = single_edge({0, 2}, Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0), 1.0, 0.5);
  CHECK_THROWS_AS(negative_engine(pos), EngineError);
  const auto lng = single_edge({0, 2}, Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 4), -9.0, 0.5);
  CHECK_THROWS_AS(negative_engine(lng), EngineError);
  const auto wrong = single_edge({2, 0}, Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0), -9.0, 0.5);
  CHECK_THROWS_AS(negative_engine(wrong), EngineError);
}

TEST_CASE("engine output is deterministic") {
  Rng rng(37);
  const auto X = random_graph(rng, 12);
  auto [g, images] = random_short_instance(rng, X, 2, 1.0);
  const auto f = PLMap::on(X, {2, 0}, images);
  EngineRequest req{f, g, 0, {0.2}, std::nullopt, {}};
  const auto a = positive_engine(req);
  const auto b = positive_engine(req);
  CHECK(a.output.images() == b.output.images());
  CHECK(a.output.domain() == b.output.domain());
}
