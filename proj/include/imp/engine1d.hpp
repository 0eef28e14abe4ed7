#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "imp/complex.hpp"
#include "imp/forms.hpp"

namespace imp {

/// A constant-speed PL arc over the parameter interval [0, 1].
struct Polyline {
  std::vector<double> params;  // strictly increasing, params.front() == 0, params.back() == 1
  std::vector<Eigen::VectorXd> points;

  std::size_t segments() const { return points.empty() ? 0 : points.size() - 1; }
  double length() const;
};

struct EdgeViolation {
  Edge edge;
  double deficit = 0.0;  // how far the edge is from satisfying the engine precondition
};

class EngineError : public std::runtime_error {
 public:
  EngineError(const std::string& what, std::vector<EdgeViolation> violations = {})
      : std::runtime_error(what), violations_(std::move(violations)) {}
  const std::vector<EdgeViolation>& violations() const { return violations_; }

 private:
  std::vector<EdgeViolation> violations_;
};

/// Perpendicular offset of each tooth peak: sqrt(L^2 - d^2) / (2m).
double sawtooth_amplitude(double base_length, double target_length, int teeth);

/// Least m with amplitude + base_length / m < accuracy.
int tooth_count(double base_length, double target_length, double accuracy);

/// Zigzag from a to b made of 2m equal segments of total length
/// target_length. Odd vertices sit at the base midpoints pushed out along
/// `normal` by the amplitude.
Polyline sawtooth_edge(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double target_length, int teeth,
                       const Eigen::VectorXd& normal);

/// Path on the real line from a to b of length target_length, made of
/// ceil((target - |b-a|) / (2 bound)) equal out-and-back excursions spread
/// over equal chunks of the base. Deviation from the straight parametrization
/// stays within `excursion_bound`.
Polyline fold_edge_1d(double a, double b, double target_length, double excursion_bound);

/// Unit vector orthogonal to `direction`: the first standard basis vector not
/// parallel to it, Gram-Schmidt against direction. Falls back to later basis
/// vectors, then to a seeded random vector, when the result collides with a
/// vector in `used`.
Eigen::VectorXd pick_normal(const Eigen::VectorXd& direction, std::span<const Eigen::VectorXd> used,
                            std::uint64_t seed);

struct EngineOptions {
  double energy_tolerance = 1e-9;      // relative
  double orthogonality_tolerance = 1e-12;
  std::uint64_t seed = 0;
};

/// Input to a Krat/Akopyan engine. The graph is the domain of `input`;
/// `target` assigns the energy every graph edge must end up with.
struct EngineRequest {
  PLMap input;
  EdgeMetric target;
  VertexId base = 0;
  std::vector<double> epsilon;  // per shell of the graph about `base`
  /// Per-edge accuracy overriding the shell schedule (graph edge order).
  std::optional<std::vector<double>> edge_accuracy;
  EngineOptions options;
};

struct EngineResult {
  PLMap output;          // on a subdivision of the graph
  CarrierMap carrier;    // subdivision -> graph
  EdgeMetric achieved;   // per subdivision edge
  std::vector<double> shell_deviation;  // exact sup |output - input| per graph shell
};

/// Engine contract: exact per-edge energies, shellwise closeness.
using Engine = std::function<EngineResult(const EngineRequest&)>;

/// Positive-definite engine for metric graphs in E^N.
EngineResult positive_engine(const EngineRequest& request);

/// Negative-definite engine for metric graphs in R^{0,N}; runs the positive
/// construction on |energies| inside the negative block.
EngineResult negative_engine(const EngineRequest& request);

}  // namespace imp
