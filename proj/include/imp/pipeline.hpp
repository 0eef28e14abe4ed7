#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "imp/complex.hpp"
#include "imp/engine1d.hpp"
#include "imp/forms.hpp"
#include "imp/verify.hpp"

namespace imp {

class PipelineError : public std::runtime_error {
 public:
  PipelineError(const std::string& what, std::vector<EdgeViolation> violations = {})
      : std::runtime_error(what), violations_(std::move(violations)) {}
  const std::vector<EdgeViolation>& violations() const { return violations_; }

 private:
  std::vector<EdgeViolation> violations_;
};

enum class Mode { embed, isometry };

struct PipelineRequest {
  PLMap f;      // on the original complex, which must be a graph
  EdgeMetric g;
  VertexId base = 0;
  std::vector<double> epsilon;  // per shell about `base`; extended by its last entry
  Mode mode = Mode::embed;
  std::uint64_t seed = 0;
  double margin = 1.0;
  Engine positive = positive_engine;
  Engine negative = negative_engine;
};

/// f = f+ (+) f* (+) f-. `star` is empty when p == q == n.
struct CoordinateSplit {
  PLMap plus;
  std::optional<PLMap> star;
  PLMap minus;
};

CoordinateSplit split_coordinates(const PLMap& f, int n = 1);

using Predicate = std::function<bool(const PLMap&)>;

struct Perturbation {
  PLMap map;
  double scale = 0.0;  // fraction of the caps that was used; 0 on the fast path
  int attempts = 0;
};

/// Adds uniform noise of Euclidean norm at most caps[v] * scale to each
/// vertex image, restricted to `coordinates` (all when empty). Tries the
/// unperturbed map first, then scale 1, 1/2, 1/4, ... for at most 32 retries.
Perturbation perturb_general_position(const PLMap& f, std::span<const double> caps, std::uint64_t seed,
                                      std::span<const Predicate> predicates, std::span<const int> coordinates = {});

/// H(e) = min(E_g, E_gf) - margin (1 + |E_g| + |E_gf|).
EdgeMetric construct_H(const EdgeMetric& g, const EdgeMetric& gf, double margin);

/// Which point pairs count as far when measuring image separation.
///  lebesgue:   pairs at domain distance >= delta_k (computed exactly per
///              segment pair).
///  structural: pairs of segments without a common vertex, plus the far
///              endpoint of one segment against its neighbour.
enum class GuardRule { lebesgue, structural };

struct EmbeddingGuard {
  std::vector<double> delta;        // per shell; +inf for shells without edges
  std::vector<double> mu;           // per shell; +inf when there is no far pair
  std::vector<double> epsilon_eff;  // min(epsilon_k, mu_k / 3)
  /// The same separation restricted to pairs involving one edge (domain edge
  /// order). If every edge moves less than a third of its own separation, no
  /// far pair can close up, so these may replace the shell values.
  std::vector<double> edge_mu;
  std::vector<double> edge_epsilon_eff;
};

EmbeddingGuard compute_guard(const PLMap& f, const EdgeMetric& g, VertexId base, std::span<const double> epsilon,
                             GuardRule rule = GuardRule::lebesgue);

/// Vertex images distinct, no degenerate segment, segments meet only at
/// shared vertices (slack is absolute). Quadratic in the number of edges.
bool is_injective(const PLMap& f, double slack = 0.0);

/// At every vertex, the incident segments projected onto `coordinates` are
/// non-degenerate and pairwise not positively parallel, so the projection is
/// injective on each closed star.
bool is_local_embedding(const PLMap& f, std::span<const int> coordinates);

struct PipelineReport {
  Mode mode = Mode::embed;
  EmbeddingGuard guard;
  int perturbation_attempts = 0;
  double perturbation_scale = 0.0;
  int reperturbation_attempts = 0;
  double reperturbation_scale = 0.0;
  int construction_attempts = 0;
  std::size_t vertices_after_negative = 0;
  std::size_t vertices_final = 0;
  VerificationReport verification;

  bool pass() const { return verification.pass(); }
};

struct PipelineResult {
  PLMap h;
  PipelineReport report;
};

/// Main theorem at n = 1. Verification failures are reported, not hidden.
PipelineResult isometric_embed(const PipelineRequest& request);

/// Isometry corollary: no f*, no perturbation, no injectivity requirement.
PipelineResult pl_isometry(const PipelineRequest& request);

PipelineResult run_pipeline(const PipelineRequest& request);

}  // namespace imp
