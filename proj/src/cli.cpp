#include "imp/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "imp/document.hpp"
#include "imp/pipeline.hpp"
#include "imp/svg.hpp"
#include "imp/verify.hpp"

namespace imp::cli {

namespace {

using nlohmann::json;

void error_block(std::ostream& err, const std::string& kind, const std::string& message, json extra = json::object()) {
  json e = std::move(extra);
  e["kind"] = kind;
  e["message"] = message;
  err << json{{"error", e}}.dump() << "\n";
}

std::string simplex_labels(const SimplicialComplex& X, const Simplex& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(X.label(s[i]));
  return out + "}";
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  const PolyhedronDocument doc = load_document(path);
  const SimplicialComplex& X = doc.root();
  std::vector<std::string> problems;
  if (X.closure_added() > 0)
    problems.push_back("simplex list is not downward closed: " + std::to_string(X.closure_added()) +
                       " face(s) missing");
  if (doc.map && doc.map->domain().dimension() > 1) problems.push_back("map domain must be a graph");
  if (doc.map && doc.source_map && doc.map->signature() != doc.source_map->signature())
    problems.push_back("map and source_map have different signatures");
  json summary{{"vertices", X.vertex_count()},
               {"simplices", X.simplices().size()},
               {"edges", X.edges().size()},
               {"dimension", X.dimension()},
               {"metric", metric_complete(doc) && X.edges().size() > 0},
               {"map", doc.map.has_value()},
               {"valid", problems.empty()}};
  out << summary.dump() << "\n";
  if (!problems.empty()) {
    error_block(err, "validation", problems.front(), {{"problems", problems}});
    return failure;
  }
  return ok;
}

int cmd_signature(const std::string& path, std::ostream& out, std::ostream& err) {
  const PolyhedronDocument doc = load_document(path);
  const SimplicialComplex& X = doc.root();
  if (!metric_complete(doc) || X.edges().empty()) {
    error_block(err, "validation", "signature needs a metric on every edge");
    return failure;
  }
  out << "simplex\tn_plus\tn_zero\tn_minus\n";
  for (const Simplex& s : X.simplices()) {
    if (s.size() < 2) continue;
    const QuadraticForm form = gram_matrix(s, doc.metric);
    const Inertia in = signature(form);
    out << simplex_labels(X, s) << '\t' << in.positive << '\t' << in.zero << '\t' << in.negative << '\n';
  }
  return ok;
}

int cmd_shells(const std::string& path, std::int64_t vertex, std::ostream& out, std::ostream&) {
  const PolyhedronDocument doc = load_document(path);
  const SimplicialComplex& X = doc.root();
  const ShellDecomposition d = shell_decomposition(X, X.id_of(vertex));
  for (std::size_t k = 0; k < d.shells.size(); ++k) {
    out << "Sh" << k + 1 << ":";
    std::vector<const Simplex*> order;
    for (const auto& s : d.shells[k]) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(), [](const Simplex* a, const Simplex* b) { return a->size() < b->size(); });
    for (const Simplex* s : order) out << ' ' << simplex_labels(X, *s);
    out << '\n';
  }
  return ok;
}

struct ApproximateOptions {
  std::string path;
  std::string out_path;
  std::optional<std::string> mode;
  std::vector<double> eps;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> vertex;
  std::optional<double> margin;
};

int cmd_approximate(const ApproximateOptions& o, std::ostream& out, std::ostream& err) {
  const PolyhedronDocument in = load_document(o.path);
  const SimplicialComplex& X = in.root();
  if (!metric_complete(in) || X.edges().empty()) {
    error_block(err, "validation", "approximate needs a metric on every edge");
    return failure;
  }
  if (!in.map || !in.map->is_on_root()) {
    error_block(err, "validation", "approximate needs a map defined on the complex itself");
    return failure;
  }
  Schedule sch = in.schedule.value_or(Schedule{X.label(0), {}, 0, std::nullopt, std::nullopt});
  if (o.mode) sch.mode = *o.mode == "embed" ? Mode::embed : Mode::isometry;
  if (!sch.mode) sch.mode = Mode::embed;
  if (!o.eps.empty()) sch.epsilon = o.eps;
  if (sch.epsilon.empty()) {
    error_block(err, "usage", "no epsilon schedule: pass --eps or add a schedule block");
    return usage;
  }
  for (double e : sch.epsilon) {
    if (!(e > 0.0)) {
      error_block(err, "usage", "--eps values must be positive");
      return usage;
    }
  }
  if (o.seed) sch.seed = *o.seed;
  if (o.vertex) sch.base = *o.vertex;
  if (o.margin) sch.margin = *o.margin;

  PipelineRequest req;
  req.f = *in.map;
  req.g = in.metric;
  req.base = X.id_of(sch.base);
  req.epsilon = sch.epsilon;
  req.mode = *sch.mode;
  req.seed = sch.seed;
  if (sch.margin) req.margin = *sch.margin;
  const PipelineResult result = run_pipeline(req);

  PolyhedronDocument doc;
  doc.complex = in.complex;
  doc.metric = in.metric;
  doc.map = result.h;
  doc.source_map = *in.map;
  doc.schedule = sch;
  doc.report = to_json(result.report, X, result.h.domain());
  save_document(doc, o.out_path);
  out << doc.report.dump() << "\n";
  if (!result.report.pass()) {
    error_block(err, "verification", "the constructed map failed verification; see the report in " + o.out_path);
    return failure;
  }
  return ok;
}

int cmd_verify(const std::string& path, const std::string& against, bool skip_embedding, std::ostream& out,
               std::ostream& err) {
  const PolyhedronDocument doc = load_document(path);
  const PolyhedronDocument ref = load_document(against);
  if (!(doc.root() == ref.root())) {
    error_block(err, "validation", "the two documents describe different complexes");
    return failure;
  }
  if (!doc.map) {
    error_block(err, "validation", path + " has no map");
    return failure;
  }
  if (!metric_complete(ref) || ref.root().edges().empty()) {
    error_block(err, "validation", against + " has no complete metric");
    return failure;
  }
  const PLMap& h = *doc.map;
  VerificationReport rep;
  rep.energy = verify_isometry(h, ref.metric);
  if (!skip_embedding) rep.embedding = verify_embedding(h, std::nullopt, &ref.metric);

  std::optional<PLMap> f = doc.source_map;
  if (!f && ref.map && ref.map->is_on_root()) f = ref.map;
  const std::optional<Schedule> sch = doc.schedule ? doc.schedule : ref.schedule;
  json skipped;
  if (f && sch) {
    const ShellDecomposition shells = shell_decomposition(ref.root(), ref.root().id_of(sch->base));
    rep.closeness = verify_closeness(*f, h, shells, sch->epsilon, 100);
  } else {
    skipped = "no source map or schedule to compare against";
  }
  json report = to_json(rep, ref.root(), h.domain());
  if (!skipped.is_null()) report["closeness"] = {{"skipped", skipped}};
  out << report.dump() << "\n";
  if (!rep.pass()) {
    error_block(err, "verification", "verification failed", {{"report", report}});
    return failure;
  }
  return ok;
}

int cmd_plot(const std::string& path, const std::string& out_path, const std::string& project, std::ostream& out,
             std::ostream& err) {
  int i = 0;
  int j = 1;
  char comma = 0;
  std::istringstream ps(project);
  if (!(ps >> i >> comma >> j) || comma != ',' || !ps.eof()) {
    error_block(err, "usage", "--project expects two indices like 0,1");
    return usage;
  }
  const PolyhedronDocument doc = load_document(path);
  const std::string svg = render_svg(doc, i, j);
  std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
  if (!f) throw DocumentError("cannot write " + out_path);
  f << svg;
  out << out_path << "\n";
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Piecewise-linear isometric embeddings of indefinite metric graphs", "imp"};
  app.require_subcommand(1);

  std::string file;
  auto* validate = app.add_subcommand("validate", "structural and invariant checks");
  validate->add_option("file", file, "document")->required();

  auto* sig = app.add_subcommand("signature", "per-simplex signature table");
  sig->add_option("file", file, "document")->required();

  std::int64_t vertex = 0;
  auto* shells = app.add_subcommand("shells", "shell decomposition about a vertex");
  shells->add_option("file", file, "document")->required();
  shells->add_option("--vertex", vertex, "base vertex id")->required();

  ApproximateOptions ao;
  std::string mode;
  std::uint64_t seed = 0;
  std::int64_t base = 0;
  double margin = 0.0;
  auto* approx = app.add_subcommand("approximate", "run the embedding pipeline");
  approx->add_option("file", ao.path, "document with metric and map")->required();
  auto* mode_opt = approx->add_option("--mode", mode, "embed or isometry")->check(CLI::IsMember({"embed", "isometry"}));
  approx->add_option("--eps", ao.eps, "epsilon per shell (scalar or comma list)")->delimiter(',');
  auto* seed_opt = approx->add_option("--seed", seed, "random seed");
  approx->add_option("--out", ao.out_path, "output document")->required();
  auto* vertex_opt = approx->add_option("--vertex", base, "base vertex id");
  auto* margin_opt = approx->add_option("--margin", margin, "H margin")->check(CLI::PositiveNumber);

  std::string against;
  bool skip_embedding = false;
  auto* verify = app.add_subcommand("verify", "run the verification oracles");
  verify->add_option("file", file, "document with a map")->required();
  verify->add_option("--against", against, "document with the metric")->required();
  verify->add_flag("--skip-embedding", skip_embedding, "do not require injectivity");

  std::string svg_out;
  std::string project = "0,1";
  auto* plot = app.add_subcommand("plot", "SVG projection of the maps");
  plot->add_option("file", file, "document with a map")->required();
  plot->add_option("--out", svg_out, "SVG file")->required();
  plot->add_option("--project", project, "coordinates i,j");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    error_block(err, "usage", e.what());
    return usage;
  }

  try {
    if (*validate) return cmd_validate(file, out, err);
    if (*sig) return cmd_signature(file, out, err);
    if (*shells) return cmd_shells(file, vertex, out, err);
    if (*approx) {
      if (*mode_opt) ao.mode = mode;
      if (*seed_opt) ao.seed = seed;
      if (*vertex_opt) ao.vertex = base;
      if (*margin_opt) ao.margin = margin;
      return cmd_approximate(ao, out, err);
    }
    if (*verify) return cmd_verify(file, against, skip_embedding, out, err);
    if (*plot) return cmd_plot(file, svg_out, project, out, err);
  } catch (const DocumentError& e) {
    json extra = json::object();
    if (e.line() > 0) extra = {{"line", e.line()}, {"column", e.column()}};
    error_block(err, "document", e.what(), extra);
    return failure;
  } catch (const PipelineError& e) {
    json violations = json::array();
    for (const auto& v : e.violations()) violations.push_back({{"edge", {v.edge.a, v.edge.b}}, {"deficit", v.deficit}});
    error_block(err, "pipeline", e.what(), {{"violations", violations}});
    return failure;
  } catch (const EngineError& e) {
    json violations = json::array();
    for (const auto& v : e.violations()) violations.push_back({{"edge", {v.edge.a, v.edge.b}}, {"deficit", v.deficit}});
    error_block(err, "engine", e.what(), {{"violations", violations}});
    return failure;
  } catch (const std::exception& e) {
    error_block(err, "failure", e.what());
    return failure;
  }
  error_block(err, "usage", "no subcommand");
  return usage;
}

}  // namespace imp::cli
