#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "imp/complex.hpp"
#include "imp/forms.hpp"

namespace imp {

// Independent checks for produced maps. Nothing in here is shared with the
// constructions in engine1d / pipeline.

struct EnergyReport {
  bool pass = false;
  double max_relative_error = 0.0;
  Simplex worst_parent;             // root simplex carrying the worst child edge
  std::optional<Edge> worst_child;  // child edge with the largest error
  std::size_t edges_checked = 0;
  std::string reason;               // set when a child edge cannot be located
};

struct EmbeddingReport {
  bool pass = false;
  std::optional<std::pair<Edge, Edge>> offending;  // child edges (dense ids of h's domain)
  std::string reason;
  std::size_t pairs_tested = 0;
  double slack = 0.0;
};

struct ClosenessReport {
  bool pass = false;
  std::vector<double> sup_deviation;  // per shell
  std::vector<double> epsilon;        // per shell, schedule extended by its last entry
  std::size_t samples = 0;
};

struct VerificationReport {
  EnergyReport energy;
  std::optional<EmbeddingReport> embedding;
  std::optional<ClosenessReport> closeness;

  bool pass() const {
    return energy.pass && (!embedding || embedding->pass) && (!closeness || closeness->pass);
  }
};

/// Every child edge of h, carried by root simplex sigma with barycentric
/// displacement d, must carry energy -1/2 sum_ij d_i d_j E(e_ij); for an edge
/// piece of fraction t that is t^2 E. Relative error is measured against
/// max(|expected|, Euclidean squared length of the image displacement).
EnergyReport verify_isometry(const PLMap& h, const EdgeMetric& g, double tol = 1e-9);

/// Exhaustive segment-pair test for maps of graphs. Segments sharing a
/// vertex may meet only there; all other pairs must be farther apart than
/// slack (default 1e-12 times the bounding-box diameter). When `g` is given,
/// collapsed pieces of zero-energy edges are tolerated.
EmbeddingReport verify_embedding(const PLMap& h, std::optional<double> slack = std::nullopt,
                                 const EdgeMetric* g = nullptr);

/// Sup of |f - h| per shell over `samples_per_edge` equally spaced samples on
/// every child edge of h (endpoints included). f must live on the root.
ClosenessReport verify_closeness(const PLMap& f, const PLMap& h, const ShellDecomposition& shells,
                                 std::span<const double> epsilon, int samples_per_edge = 100);

/// Minimum Euclidean distance between h(x) and h(y) over all point pairs at
/// intrinsic distance >= cutoff, computed exactly per pair of child edges.
/// Edge lengths are |signed_length| of g, zero-energy edges counting 1.
/// Returns +infinity when there is no such pair.
double brute_force_min_separation(const PLMap& h, const EdgeMetric& g, double cutoff);

}  // namespace imp
