#include "imp/forms.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace imp {

double signed_square(double x) { return x >= 0.0 ? x * x : -x * x; }

double signed_length(double energy) { return energy >= 0.0 ? std::sqrt(energy) : -std::sqrt(-energy); }

void MinkowskiSignature::validate() const {
  if (p < 0 || q < 0 || p + q < 1)
    throw FormError("invalid signature (" + std::to_string(p) + "," + std::to_string(q) + ")");
}

double minkowski_energy(std::span<const double> v, MinkowskiSignature sig) {
  if (static_cast<int>(v.size()) != sig.dimension())
    throw FormError("vector length " + std::to_string(v.size()) + " does not match signature dimension " +
                    std::to_string(sig.dimension()));
  double pos = 0.0;
  double neg = 0.0;
  for (int i = 0; i < sig.p; ++i) pos += v[i] * v[i];
  for (int i = sig.p; i < sig.dimension(); ++i) neg += v[i] * v[i];
  return pos - neg;
}

double minkowski_energy(const Eigen::VectorXd& v, MinkowskiSignature sig) {
  return minkowski_energy(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())), sig);
}

EdgeMetric::EdgeMetric(std::map<Edge, double> energies) : energies_(std::move(energies)) {
  for (auto& [e, value] : energies_) {
    if (!(e.a < e.b)) throw FormError("edge keys must have a < b");
    if (!std::isfinite(value)) throw FormError("non-finite energy on edge");
  }
}

EdgeMetric EdgeMetric::on(const SimplicialComplex& complex, std::span<const double> energies) {
  if (energies.size() != complex.edges().size()) throw FormError("one energy per edge is required");
  std::map<Edge, double> m;
  for (std::size_t i = 0; i < energies.size(); ++i) m.emplace(complex.edges()[i], energies[i]);
  return EdgeMetric(std::move(m));
}

double EdgeMetric::energy(Edge e) const {
  auto it = energies_.find(e);
  if (it == energies_.end())
    throw FormError("missing energy for edge (" + std::to_string(e.a) + "," + std::to_string(e.b) + ")");
  return it->second;
}

void EdgeMetric::set(Edge e, double energy) {
  if (!std::isfinite(energy)) throw FormError("non-finite energy on edge");
  energies_[e] = energy;
}

void EdgeMetric::check_covers(const SimplicialComplex& complex) const {
  for (const Edge& e : complex.edges()) energy(e);
  if (energies_.size() != complex.edges().size()) throw FormError("metric has energies for edges not in the complex");
}

double QuadraticForm::edge_energy(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  if (i > j) std::swap(i, j);
  if (i == 0) return gram(j - 1, j - 1);
  return gram(i - 1, i - 1) + gram(j - 1, j - 1) - 2.0 * gram(i - 1, j - 1);
}

QuadraticForm gram_matrix(std::span<const VertexId> ordered, const EdgeMetric& metric) {
  if (ordered.empty()) throw FormError("empty simplex");
  const std::size_t k = ordered.size() - 1;
  auto rows = polarize<double>(k, [&](std::size_t i, std::size_t j) {
    return metric.energy(make_edge(ordered[i], ordered[j]));
  });
  QuadraticForm form;
  form.vertices.assign(ordered.begin(), ordered.end());
  form.gram.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) form.gram(i, j) = rows[i][j];
  return form;
}

double default_tolerance(const QuadraticForm& form) {
  double m = form.gram.size() ? form.gram.cwiseAbs().maxCoeff() : 0.0;
  return 1e-9 * (1.0 + m);
}

namespace {

Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw FormError("eigenvalue computation failed");
  return solver.eigenvalues();
}

void require_same_shape(const QuadraticForm& a, const QuadraticForm& b) {
  if (a.vertices != b.vertices || a.gram.rows() != b.gram.rows() || a.gram.cols() != b.gram.cols())
    throw FormError("quadratic forms are on different simplices or vertex orders");
}

}  // namespace

Inertia signature(const QuadraticForm& form, std::optional<double> tol) {
  const double t = tol.value_or(default_tolerance(form));
  if (!(t > 0.0)) throw FormError("tolerance must be positive");
  Inertia out;
  for (double lambda : eigenvalues(form.gram)) {
    if (std::abs(lambda) <= t) ++out.zero;
    else if (lambda > 0.0) ++out.positive;
    else ++out.negative;
  }
  return out;
}

bool is_short(const QuadraticForm& induced, const QuadraticForm& prescribed, bool strict, std::optional<double> tol) {
  require_same_shape(induced, prescribed);
  QuadraticForm diff{prescribed.vertices, prescribed.gram - induced.gram};
  const double t = tol.value_or(std::max(default_tolerance(induced), default_tolerance(prescribed)));
  const Eigen::VectorXd ev = eigenvalues(diff.gram);
  if (ev.size() == 0) return true;
  const double smallest = ev.minCoeff();
  return strict ? smallest > t : smallest >= -t;
}

QuadraticForm sum_forms(const QuadraticForm& a, const QuadraticForm& b) {
  require_same_shape(a, b);
  return QuadraticForm{a.vertices, a.gram + b.gram};
}

}  // namespace imp
