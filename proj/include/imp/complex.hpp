#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace imp {

// Dense vertex index, 0..vertex_count()-1.
using VertexId = int;

// A simplex is its vertex set, stored strictly increasing.
using Simplex = std::vector<VertexId>;
using SimplexSet = std::set<Simplex>;

struct Edge {
  VertexId a = 0;
  VertexId b = 0;  // a < b

  auto operator<=>(const Edge&) const = default;
};

Edge make_edge(VertexId u, VertexId v);

class ComplexError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite abstract simplicial complex.
///
/// Vertices carry an external label (the id used in documents) and a dense
/// index used everywhere else. The simplex family is always downward closed.
class SimplicialComplex {
 public:
  SimplicialComplex() = default;

  /// Builds from labelled vertices and a list of simplices given by label.
  /// Missing faces are added; closure_added() reports how many.
  static SimplicialComplex build(std::vector<std::int64_t> labels,
                                 const std::vector<std::vector<std::int64_t>>& simplices);

  /// Builds from dense ids; labels are the ids themselves unless given.
  static SimplicialComplex from_dense(int vertex_count, const std::vector<Simplex>& simplices,
                                      std::vector<std::int64_t> labels = {});

  int vertex_count() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::int64_t>& labels() const { return labels_; }
  std::int64_t label(VertexId v) const { return labels_.at(v); }
  VertexId id_of(std::int64_t label) const;

  const SimplexSet& simplices() const { return simplices_; }
  bool contains(const Simplex& s) const { return simplices_.count(s) > 0; }
  int dimension() const { return dimension_; }

  const std::vector<Edge>& edges() const { return edges_; }
  int edge_index(Edge e) const;
  const std::vector<int>& incident_edges(VertexId v) const { return incident_.at(v); }

  /// Number of faces that had to be added to make the input downward closed.
  std::size_t closure_added() const { return closure_added_; }

  bool operator==(const SimplicialComplex& other) const {
    return labels_ == other.labels_ && simplices_ == other.simplices_;
  }

 private:
  void index();

  std::vector<std::int64_t> labels_;
  std::map<std::int64_t, VertexId> by_label_;
  SimplexSet simplices_;
  std::vector<Edge> edges_;
  std::map<Edge, int> edge_ids_;
  std::vector<std::vector<int>> incident_;
  int dimension_ = -1;
  std::size_t closure_added_ = 0;
};

/// All simplices containing v, together with all their faces.
SimplexSet closed_star(const SimplicialComplex& complex, VertexId v);

/// Shells about a base vertex: Sh^1 = St(v), Sh^k = St^k(v) \ St^{k-1}(v).
///
/// Simplices in components that never meet St^k(v) are collected into one
/// trailing shell so the shells always partition the complex.
struct ShellDecomposition {
  VertexId base = 0;
  std::vector<SimplexSet> shells;
  std::map<Simplex, std::size_t> index;  // simplex -> zero-based shell

  /// Zero-based shell index of a simplex.
  std::size_t shell_of(const Simplex& s) const;
};

ShellDecomposition shell_decomposition(const SimplicialComplex& complex, VertexId v);

/// Position of a child vertex inside the original complex: the open simplex
/// containing it and the barycentric weights on that simplex's vertices.
struct Carrier {
  Simplex support;
  std::vector<double> weights;  // aligned with support, all > 0, sum 1
};

/// Child vertex -> carrier in the root (original) complex.
class CarrierMap {
 public:
  CarrierMap() = default;
  explicit CarrierMap(std::vector<Carrier> carriers) : carriers_(std::move(carriers)) {}

  static CarrierMap identity(const SimplicialComplex& complex);

  std::size_t size() const { return carriers_.size(); }
  const Carrier& operator[](VertexId child) const { return carriers_.at(child); }
  const std::vector<Carrier>& carriers() const { return carriers_; }

  /// Root edge carrying a child edge, if the two endpoints lie on one root
  /// edge (or are its endpoints).
  bool root_edge_of(VertexId u, VertexId v, Edge& root, double& tu, double& tv) const;

 private:
  std::vector<Carrier> carriers_;
};

/// Re-expresses carriers of `child` (given relative to a middle complex) in
/// terms of the root that `middle` is carried by.
CarrierMap compose(const CarrierMap& child, const CarrierMap& middle);

struct Subdivision {
  SimplicialComplex complex;
  CarrierMap carrier;  // relative to the complex that was subdivided
  std::map<Edge, std::vector<VertexId>> chains;  // new vertices along each split edge, from e.a to e.b
};

/// Splits each planned edge into m equal parts.
Subdivision subdivide_edges(const SimplicialComplex& complex, const std::map<Edge, int>& plan);

/// Splits each listed edge at the given interior parameters (strictly
/// increasing, inside (0,1), measured from e.a towards e.b).
Subdivision subdivide_edges_at(const SimplicialComplex& complex,
                               const std::map<Edge, std::vector<double>>& breaks);

}  // namespace imp
