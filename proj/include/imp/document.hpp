#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "imp/complex.hpp"
#include "imp/forms.hpp"
#include "imp/pipeline.hpp"
#include "json.hpp"

namespace imp {

class DocumentError : public std::runtime_error {
 public:
  DocumentError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what
                                    : what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct Schedule {
  std::int64_t base = 0;  // vertex label
  std::vector<double> epsilon;
  std::uint64_t seed = 0;
  std::optional<Mode> mode;
  std::optional<double> margin;
};

/// In-memory form of an `imp-1` document.
///
///   {"format": "imp-1",
///    "vertices": [labels], "simplices": [[labels], ...],
///    "metric": [{"edge": [a, b], "unit": "energy" | "signed_length", "value": x}],
///    "map": {"signature": [p, q] | "signs": "+-+", "images": [[...], ...],
///            "domain": {"vertices": [labels], "edges": [[a, b], ...],
///                       "carriers": [{"support": [root labels], "weights": [...]}]}},
///    "source_map": {...same shape...},
///    "schedule": {"base": label, "eps": [...], "seed": s, "mode": "embed" | "isometry", "margin": m},
///    "report": {...}}
///
/// Without "domain" a map lives on the complex itself and its images follow
/// "vertices". The metric is always saved as energies.
struct PolyhedronDocument {
  std::shared_ptr<const SimplicialComplex> complex;
  EdgeMetric metric;
  std::optional<PLMap> map;
  std::optional<PLMap> source_map;
  std::optional<Schedule> schedule;
  nlohmann::json report;  // null when absent

  const SimplicialComplex& root() const { return *complex; }
};

PolyhedronDocument parse_document(const std::string& text);
std::string serialize_document(const PolyhedronDocument& doc);

PolyhedronDocument load_document(const std::filesystem::path& path);
void save_document(const PolyhedronDocument& doc, const std::filesystem::path& path);

/// Metric entries are optional in documents that only carry a complex; this
/// reports whether every edge got one.
bool metric_complete(const PolyhedronDocument& doc);

/// JSON for reports (non-finite numbers become null).
nlohmann::json to_json(const EnergyReport& r, const SimplicialComplex& root, const SimplicialComplex& child);
nlohmann::json to_json(const EmbeddingReport& r, const SimplicialComplex& child);
nlohmann::json to_json(const ClosenessReport& r);
nlohmann::json to_json(const VerificationReport& r, const SimplicialComplex& root, const SimplicialComplex& child);
nlohmann::json to_json(const PipelineReport& r, const SimplicialComplex& root, const SimplicialComplex& child);

}  // namespace imp
