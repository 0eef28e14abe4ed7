#pragma once

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "imp/complex.hpp"

namespace imp {

class FormError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// s(x) = x^2 for x >= 0, -x^2 for x < 0. Converts signed lengths to energies.
double signed_square(double x);

/// sign(E) * sqrt(|E|); inverse of signed_square.
double signed_length(double energy);

/// Signature (p, q) of a Minkowski space R^{p,q}: the first p coordinates are
/// positive, the last q negative.
struct MinkowskiSignature {
  int p = 0;
  int q = 0;

  int dimension() const { return p + q; }
  bool operator==(const MinkowskiSignature&) const = default;
  void validate() const;
};

double minkowski_energy(std::span<const double> v, MinkowskiSignature sig);
double minkowski_energy(const Eigen::VectorXd& v, MinkowskiSignature sig);

/// Indefinite metric stored as signed energies (squared lengths) per edge.
class EdgeMetric {
 public:
  EdgeMetric() = default;
  explicit EdgeMetric(std::map<Edge, double> energies);

  /// One energy per edge of `complex`, in complex.edges() order.
  static EdgeMetric on(const SimplicialComplex& complex, std::span<const double> energies);

  double energy(Edge e) const;
  bool has(Edge e) const { return energies_.count(e) > 0; }
  void set(Edge e, double energy);
  const std::map<Edge, double>& energies() const { return energies_; }
  std::size_t size() const { return energies_.size(); }

  /// Every edge of `complex` carries exactly one energy and nothing else.
  void check_covers(const SimplicialComplex& complex) const;

  bool operator==(const EdgeMetric&) const = default;

 private:
  std::map<Edge, double> energies_;
};

/// Gram matrix <w_i, w_j> of a simplex (v_0..v_k) with w_i = v_i - v_0.
struct QuadraticForm {
  Simplex vertices;  // ordered, v_0 first
  Eigen::MatrixXd gram;

  /// Energy of the edge between vertices[i] and vertices[j], recovered from
  /// the gram matrix.
  double edge_energy(std::size_t i, std::size_t j) const;
};

/// Polarization: <w_i, w_j> = (E(e_0i) + E(e_0j) - E(e_ij)) / 2, where
/// energy(i, j) returns E of the edge between ordered vertices i and j.
/// Templated so the identity can be checked in exact arithmetic.
template <class Scalar, class EnergyFn>
std::vector<std::vector<Scalar>> polarize(std::size_t k, EnergyFn&& energy) {
  std::vector<std::vector<Scalar>> g(k, std::vector<Scalar>(k));
  for (std::size_t i = 1; i <= k; ++i) {
    g[i - 1][i - 1] = Scalar(energy(0, i));
    for (std::size_t j = i + 1; j <= k; ++j) {
      Scalar v = (Scalar(energy(0, i)) + Scalar(energy(0, j)) - Scalar(energy(i, j))) / Scalar(2);
      g[i - 1][j - 1] = v;
      g[j - 1][i - 1] = v;
    }
  }
  return g;
}

QuadraticForm gram_matrix(std::span<const VertexId> ordered, const EdgeMetric& metric);

struct Inertia {
  int positive = 0;
  int zero = 0;
  int negative = 0;

  bool operator==(const Inertia&) const = default;
};

/// 1e-9 * (1 + max |gram entry|).
double default_tolerance(const QuadraticForm& form);

/// Eigenvalue counts; |lambda| <= tol counts as zero.
Inertia signature(const QuadraticForm& form, std::optional<double> tol = std::nullopt);

/// True iff prescribed - induced is positive semidefinite (definite when
/// strict), judged on eigenvalues with tolerance tol.
bool is_short(const QuadraticForm& induced, const QuadraticForm& prescribed, bool strict,
              std::optional<double> tol = std::nullopt);

QuadraticForm sum_forms(const QuadraticForm& a, const QuadraticForm& b);

/// A map into R^{p,q}, affine on every simplex of its domain. The domain is
/// either the original complex or a subdivision of it, in which case the
/// carrier map locates domain vertices in the original.
class PLMap {
 public:
  PLMap() = default;
  PLMap(std::shared_ptr<const SimplicialComplex> domain, std::shared_ptr<const CarrierMap> carrier,
        MinkowskiSignature signature, std::vector<Eigen::VectorXd> images);

  /// Map defined directly on `domain` (identity carrier).
  static PLMap on(SimplicialComplex domain, MinkowskiSignature signature, std::vector<Eigen::VectorXd> images);

  const SimplicialComplex& domain() const { return *domain_; }
  const std::shared_ptr<const SimplicialComplex>& domain_ptr() const { return domain_; }
  const CarrierMap& carrier() const { return *carrier_; }
  const std::shared_ptr<const CarrierMap>& carrier_ptr() const { return carrier_; }
  MinkowskiSignature signature() const { return signature_; }
  const Eigen::VectorXd& image(VertexId v) const { return images_.at(v); }
  const std::vector<Eigen::VectorXd>& images() const { return images_; }

  /// True when the carrier is the identity on the domain.
  bool is_on_root() const;

  /// Same domain and carrier, new images and signature.
  PLMap with_images(MinkowskiSignature signature, std::vector<Eigen::VectorXd> images) const;

 private:
  std::shared_ptr<const SimplicialComplex> domain_;
  std::shared_ptr<const CarrierMap> carrier_;
  MinkowskiSignature signature_;
  std::vector<Eigen::VectorXd> images_;
};

/// g_f(e_ij) = <f(v_i) - f(v_j), f(v_i) - f(v_j)> for every domain edge.
EdgeMetric induced_edge_energies(const PLMap& f);

/// Splits f into coordinate blocks. Blocks are consecutive coordinate ranges;
/// each block's declared signature must equal the counts of positive and
/// negative coordinates in its range.
std::vector<PLMap> split_map(const PLMap& f, std::span<const MinkowskiSignature> blocks);

/// Concatenation f_1 (+) f_2 (+) ... over a shared domain. Positive
/// coordinates of all parts come first, in part order, then the negative ones.
PLMap concatenate(std::span<const PLMap> parts);

}  // namespace imp
