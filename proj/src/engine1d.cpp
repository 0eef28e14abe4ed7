#include "imp/engine1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace imp {

namespace {

constexpr int kMaxTeeth = 50'000'000;

bool nearly_equal_length(double base, double target, double rel) {
  return std::abs(target - base) <= rel * std::max({target, base, std::numeric_limits<double>::min()});
}

}  // namespace

double Polyline::length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) total += (points[i] - points[i - 1]).norm();
  return total;
}

double sawtooth_amplitude(double base_length, double target_length, int teeth) {
  const double slack = std::max(0.0, target_length * target_length - base_length * base_length);
  return std::sqrt(slack) / (2.0 * teeth);
}

int tooth_count(double base_length, double target_length, double accuracy) {
  if (!(accuracy > 0.0)) throw EngineError("accuracy must be positive");
  const double slack = std::sqrt(std::max(0.0, target_length * target_length - base_length * base_length));
  const double guess = std::floor((slack / 2.0 + base_length) / accuracy);
  if (guess > kMaxTeeth) throw EngineError("tooth count exceeds limit; accuracy too small for this edge");
  int m = std::max(1, static_cast<int>(guess));
  while (m > 1 && sawtooth_amplitude(base_length, target_length, m - 1) + base_length / (m - 1) < accuracy) --m;
  while (!(sawtooth_amplitude(base_length, target_length, m) + base_length / m < accuracy)) ++m;
  return m;
}

Polyline sawtooth_edge(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double target_length, int teeth,
                       const Eigen::VectorXd& normal) {
  if (a.size() != b.size() || a.size() != normal.size()) throw EngineError("dimension mismatch");
  if (a.size() < 2) throw EngineError("sawtooth needs at least two ambient dimensions");
  if (teeth < 1) throw EngineError("tooth count must be at least 1");
  const Eigen::VectorXd base = b - a;
  const double d = base.norm();
  if (target_length < d && !nearly_equal_length(d, target_length, 1e-12))
    throw EngineError("segment is not short: target length " + std::to_string(target_length) +
                      " below base length " + std::to_string(d));
  const double nn = normal.norm();
  if (!(nn > 0.0)) throw EngineError("zero normal");
  const Eigen::VectorXd n = normal / nn;
  if (std::abs(n.dot(base)) > 1e-12 * std::max(1.0, d)) throw EngineError("normal is not orthogonal to the segment");

  const double amp = sawtooth_amplitude(d, target_length, teeth);
  const int segs = 2 * teeth;
  Polyline out;
  out.params.reserve(segs + 1);
  out.points.reserve(segs + 1);
  for (int j = 0; j <= segs; ++j) {
    const double t = static_cast<double>(j) / segs;
    Eigen::VectorXd p = a + t * base;
    if (j % 2 == 1) p += amp * n;
    out.params.push_back(t);
    out.points.push_back(std::move(p));
  }
  out.points.back() = b;
  return out;
}

Polyline fold_edge_1d(double a, double b, double target_length, double excursion_bound) {
  if (!(excursion_bound > 0.0)) throw EngineError("excursion bound must be positive");
  const double d = std::abs(b - a);
  Polyline out;
  auto point = [](double x) { return Eigen::VectorXd::Constant(1, x); };
  if (nearly_equal_length(d, target_length, 1e-12)) {
    out.params = {0.0, 1.0};
    out.points = {point(a), point(b)};
    return out;
  }
  if (target_length < d) throw EngineError("segment is not short");

  const double excess = target_length - d;
  const double k_real = std::ceil(excess / (2.0 * excursion_bound));
  if (k_real > kMaxTeeth) throw EngineError("excursion count exceeds limit; bound too small for this edge");
  const int k = std::max(1, static_cast<int>(k_real));
  const double e = excess / (2.0 * k);
  const double chunk = d / k;
  const double dir = b >= a ? 1.0 : -1.0;

  // Excursion j turns around e/2 either side of the midpoint of chunk j:
  // forward to mid + e/2, back to mid - e/2. No piece is shorter than e/2,
  // and the deviation from the straight parametrization is e(c+e)/(c+2e) < e.
  out.params.push_back(0.0);
  out.points.push_back(point(a));
  for (int j = 0; j < k; ++j) {
    const double mid = (j + 0.5) * chunk;
    const double arc_peak = mid + (2.0 * j + 0.5) * e;
    out.params.push_back(arc_peak / target_length);
    out.points.push_back(point(a + dir * (mid + e / 2.0)));
    out.params.push_back((arc_peak + e) / target_length);
    out.points.push_back(point(a + dir * (mid - e / 2.0)));
  }
  out.params.push_back(1.0);
  out.points.push_back(point(b));
  return out;
}

Eigen::VectorXd pick_normal(const Eigen::VectorXd& direction, std::span<const Eigen::VectorXd> used,
                            std::uint64_t seed) {
  const Eigen::Index dim = direction.size();
  if (dim < 2) throw EngineError("a normal needs at least two ambient dimensions");
  Eigen::VectorXd dir = direction;
  if (!(dir.norm() > 0.0)) dir = Eigen::VectorXd::Unit(dim, 0);
  dir.normalize();

  auto collides = [&](const Eigen::VectorXd& v) {
    return std::any_of(used.begin(), used.end(), [&](const Eigen::VectorXd& u) {
      return u.size() == v.size() && std::abs(std::abs(u.normalized().dot(v)) - 1.0) < 1e-9;
    });
  };

  for (Eigen::Index i = 0; i < dim; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(dim, i);
    v -= v.dot(dir) * dir;
    if (v.norm() < 1e-6) continue;
    v.normalize();
    if (!collides(v)) return v;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (int attempt = 0; attempt < 64; ++attempt) {
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = gauss(rng);
    v -= v.dot(dir) * dir;
    if (v.norm() < 1e-6) continue;
    v.normalize();
    if (!collides(v)) return v;
  }
  throw EngineError("could not find a free normal direction");
}

namespace {

EngineResult run_engine(const EngineRequest& req, bool negative) {
  const PLMap& f = req.input;
  const SimplicialComplex& graph = f.domain();
  if (graph.dimension() > 1) throw EngineError("dimension-1 engines need a graph domain");
  const MinkowskiSignature sig = f.signature();
  if (negative ? sig.p != 0 : sig.q != 0)
    throw EngineError(negative ? "negative engine needs a target R^{0,N}" : "positive engine needs a target E^N");
  const int dim = sig.dimension();
  req.target.check_covers(graph);
  const std::vector<Edge>& edges = graph.edges();

  std::vector<double> accuracy(edges.size());
  std::optional<ShellDecomposition> shells;
  if (!req.edge_accuracy) {
    if (req.epsilon.empty()) throw EngineError("empty epsilon schedule");
    shells = shell_decomposition(graph, req.base);
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::size_t k = shells->shell_of({edges[i].a, edges[i].b});
      accuracy[i] = req.epsilon[std::min(k, req.epsilon.size() - 1)];
    }
  } else {
    if (req.edge_accuracy->size() != edges.size()) throw EngineError("edge accuracy list size mismatch");
    accuracy = *req.edge_accuracy;
  }
  for (double a : accuracy)
    if (!(a > 0.0)) throw EngineError("accuracy values must be positive");

  const double tol = req.options.energy_tolerance;
  std::vector<double> target_length(edges.size());
  std::vector<EdgeViolation> violations;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    const double energy = req.target.energy(e);
    const double d = (f.image(e.b) - f.image(e.a)).norm();
    if (negative ? energy > 0.0 : !(energy > 0.0)) {
      violations.push_back({e, std::abs(energy)});
      continue;
    }
    const double len = std::sqrt(std::abs(energy));
    if (d > len && !nearly_equal_length(d, len, tol)) violations.push_back({e, d - len});
    target_length[i] = len;
  }
  if (!violations.empty()) {
    std::string msg = negative ? "negative engine precondition violated on " : "positive engine precondition violated on ";
    msg += std::to_string(violations.size()) + " edge(s); first (" + std::to_string(violations[0].edge.a) + "," +
           std::to_string(violations[0].edge.b) + ") deficit " + std::to_string(violations[0].deficit);
    throw EngineError(msg, std::move(violations));
  }

  std::vector<Polyline> arcs(edges.size());
  std::map<Edge, std::vector<double>> breaks;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    const Eigen::VectorXd& a = f.image(e.a);
    const Eigen::VectorXd& b = f.image(e.b);
    const double d = (b - a).norm();
    const double len = target_length[i];
    Polyline arc;
    if (nearly_equal_length(d, len, tol) || len == 0.0) {
      arc.params = {0.0, 1.0};
      arc.points = {a, b};
    } else if (dim == 1) {
      arc = fold_edge_1d(a[0], b[0], len, accuracy[i] / 2.0);
    } else {
      const int m = tooth_count(d, len, accuracy[i]);
      const Eigen::VectorXd n = pick_normal(b - a, {}, req.options.seed + i);
      arc = sawtooth_edge(a, b, len, m, n);
    }
    if (arc.params.size() > 2) breaks.emplace(e, std::vector<double>(arc.params.begin() + 1, arc.params.end() - 1));
    arcs[i] = std::move(arc);
  }

  Subdivision sub = subdivide_edges_at(graph, breaks);
  std::vector<Eigen::VectorXd> images(sub.complex.vertex_count());
  for (VertexId v = 0; v < graph.vertex_count(); ++v) images[v] = f.image(v);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto it = sub.chains.find(edges[i]);
    if (it == sub.chains.end()) continue;
    for (std::size_t j = 0; j < it->second.size(); ++j) images[it->second[j]] = arcs[i].points[j + 1];
  }

  auto domain = std::make_shared<const SimplicialComplex>(std::move(sub.complex));
  auto composed = std::make_shared<const CarrierMap>(compose(sub.carrier, f.carrier()));
  EngineResult result{PLMap(domain, composed, sig, std::move(images)), std::move(sub.carrier), {}, {}};
  result.achieved = induced_edge_energies(result.output);

  std::vector<double> edge_dev(edges.size(), 0.0);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Eigen::VectorXd& a = f.image(edges[i].a);
    const Eigen::VectorXd& b = f.image(edges[i].b);
    for (std::size_t j = 0; j < arcs[i].points.size(); ++j) {
      const double t = arcs[i].params[j];
      edge_dev[i] = std::max(edge_dev[i], (arcs[i].points[j] - (a + t * (b - a))).norm());
    }
  }
  if (!shells) shells = shell_decomposition(graph, req.base);
  result.shell_deviation.assign(shells->shells.size(), 0.0);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::size_t k = shells->shell_of({edges[i].a, edges[i].b});
    result.shell_deviation[k] = std::max(result.shell_deviation[k], edge_dev[i]);
  }
  return result;
}

}  // namespace

EngineResult positive_engine(const EngineRequest& request) { return run_engine(request, false); }

EngineResult negative_engine(const EngineRequest& request) { return run_engine(request, true); }

}  // namespace imp
