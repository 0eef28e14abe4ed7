#include "imp/document.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace imp {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "imp-1";

[[noreturn]] void fail(const std::string& what) { throw DocumentError(what); }

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where + ": missing \"" + key + "\"");
  return *it;
}

std::int64_t as_label(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where + ": vertex ids must be integers");
  return v.get<std::int64_t>();
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(where + ": non-finite number");
  return x;
}

std::string edge_name(std::int64_t a, std::int64_t b) {
  return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

MinkowskiSignature parse_signature(const json& m, std::vector<int>& order) {
  const int has_sig = m.contains("signature");
  const int has_signs = m.contains("signs");
  if (has_sig + has_signs != 1) fail("map: exactly one of \"signature\" and \"signs\" is required");
  MinkowskiSignature sig;
  if (has_sig) {
    const json& s = m["signature"];
    if (!s.is_array() || s.size() != 2 || !s[0].is_number_integer() || !s[1].is_number_integer())
      fail("map: signature must be [p, q]");
    sig = {s[0].get<int>(), s[1].get<int>()};
    if (sig.p < 0 || sig.q < 0 || sig.p + sig.q < 1) fail("map: signature needs p, q >= 0 and p + q >= 1");
    order.resize(sig.dimension());
    std::iota(order.begin(), order.end(), 0);
    return sig;
  }
  const json& s = m["signs"];
  if (!s.is_string() || s.get<std::string>().empty()) fail("map: signs must be a nonempty string of '+' and '-'");
  const std::string signs = s.get<std::string>();
  order.clear();
  for (std::size_t i = 0; i < signs.size(); ++i) {
    if (signs[i] != '+' && signs[i] != '-') fail("map: signs may only contain '+' and '-'");
    if (signs[i] == '+') order.push_back(static_cast<int>(i));
  }
  sig.p = static_cast<int>(order.size());
  for (std::size_t i = 0; i < signs.size(); ++i)
    if (signs[i] == '-') order.push_back(static_cast<int>(i));
  sig.q = static_cast<int>(signs.size()) - sig.p;
  return sig;
}

PLMap parse_map(const json& m, const std::string& name, const std::shared_ptr<const SimplicialComplex>& root) {
  if (!m.is_object()) fail(name + ": must be an object");
  std::vector<int> order;
  const MinkowskiSignature sig = parse_signature(m, order);

  std::shared_ptr<const SimplicialComplex> domain = root;
  std::shared_ptr<const CarrierMap> carrier;
  if (auto d = m.find("domain"); d != m.end()) {
    const std::string where = name + ".domain";
    if (!d->is_object()) fail(where + ": must be an object");
    const json& vs = require(*d, "vertices", where);
    const json& es = require(*d, "edges", where);
    const json& cs = require(*d, "carriers", where);
    if (!vs.is_array() || vs.empty() || !es.is_array() || !cs.is_array()) fail(where + ": malformed");
    std::vector<std::int64_t> labels;
    std::vector<std::vector<std::int64_t>> simplices;
    for (const auto& v : vs) {
      labels.push_back(as_label(v, where));
      simplices.push_back({labels.back()});
    }
    for (const auto& e : es) {
      if (!e.is_array() || e.size() != 2) fail(where + ": edges must be pairs");
      simplices.push_back({as_label(e[0], where), as_label(e[1], where)});
    }
    try {
      domain = std::make_shared<const SimplicialComplex>(SimplicialComplex::build(std::move(labels), simplices));
    } catch (const ComplexError& e) {
      fail(where + ": " + e.what());
    }
    if (cs.size() != static_cast<std::size_t>(domain->vertex_count()))
      fail(where + ": one carrier per vertex is required");
    std::vector<Carrier> carriers;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string cw = where + ".carriers[" + std::to_string(i) + "]";
      const json& sup = require(cs[i], "support", cw);
      const json& wts = require(cs[i], "weights", cw);
      if (!sup.is_array() || !wts.is_array() || sup.empty() || sup.size() != wts.size())
        fail(cw + ": support and weights must be nonempty and aligned");
      std::vector<std::pair<VertexId, double>> pairs;
      double total = 0.0;
      for (std::size_t j = 0; j < sup.size(); ++j) {
        VertexId r;
        try {
          r = root->id_of(as_label(sup[j], cw));
        } catch (const ComplexError& e) {
          fail(cw + ": " + e.what());
        }
        const double w = as_number(wts[j], cw);
        if (!(w > 0.0) || w > 1.0) fail(cw + ": weights must lie in (0, 1]");
        total += w;
        pairs.emplace_back(r, w);
      }
      if (std::abs(total - 1.0) > 1e-9) fail(cw + ": weights must sum to 1");
      std::sort(pairs.begin(), pairs.end());
      Carrier c;
      for (auto [r, w] : pairs) {
        if (!c.support.empty() && c.support.back() == r) fail(cw + ": repeated support vertex");
        c.support.push_back(r);
        c.weights.push_back(w);
      }
      if (!root->contains(c.support)) fail(cw + ": support is not a simplex of the complex");
      carriers.push_back(std::move(c));
    }
    carrier = std::make_shared<const CarrierMap>(std::move(carriers));
  } else {
    carrier = std::make_shared<const CarrierMap>(CarrierMap::identity(*root));
  }

  const json& imgs = require(m, "images", name);
  if (!imgs.is_array() || imgs.size() != static_cast<std::size_t>(domain->vertex_count()))
    fail(name + ": one image per vertex is required (" + std::to_string(domain->vertex_count()) + ")");
  std::vector<Eigen::VectorXd> images;
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    const std::string iw = name + ".images[" + std::to_string(i) + "]";
    if (!imgs[i].is_array() || imgs[i].size() != static_cast<std::size_t>(sig.dimension()))
      fail(iw + ": expected " + std::to_string(sig.dimension()) + " coordinates");
    Eigen::VectorXd x(sig.dimension());
    for (int c = 0; c < sig.dimension(); ++c) x[c] = as_number(imgs[i][order[c]], iw);
    images.push_back(std::move(x));
  }
  return PLMap(domain, carrier, sig, std::move(images));
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json numbers(const std::vector<double>& xs) {
  json a = json::array();
  for (double x : xs) a.push_back(number(x));
  return a;
}

json vector_json(const Eigen::VectorXd& x) {
  json a = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) a.push_back(x[i]);
  return a;
}

nlohmann::ordered_json map_json(const PLMap& m, const SimplicialComplex& root) {
  nlohmann::ordered_json out;
  out["signature"] = {m.signature().p, m.signature().q};
  if (!(m.is_on_root() && m.domain() == root)) {
    const SimplicialComplex& d = m.domain();
    nlohmann::ordered_json dom;
    dom["vertices"] = d.labels();
    json edges = json::array();
    for (const Edge& e : d.edges()) edges.push_back({d.label(e.a), d.label(e.b)});
    dom["edges"] = edges;
    json carriers = json::array();
    for (const Carrier& c : m.carrier().carriers()) {
      json sup = json::array();
      for (VertexId r : c.support) sup.push_back(root.label(r));
      carriers.push_back({{"support", sup}, {"weights", c.weights}});
    }
    dom["carriers"] = carriers;
    out["domain"] = dom;
  }
  json images = json::array();
  for (const auto& x : m.images()) images.push_back(vector_json(x));
  out["images"] = images;
  return out;
}

// Objects open one key per line; arrays of scalars stay on one line; arrays
// of compound values get one element per line.
void emit(std::ostringstream& os, const nlohmann::ordered_json& v, int indent) {
  const std::string pad(indent, ' ');
  const std::string inner(indent + 2, ' ');
  if (v.is_object()) {
    if (v.empty()) {
      os << "{}";
      return;
    }
    os << "{\n";
    bool first = true;
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (!first) os << ",\n";
      first = false;
      os << inner << nlohmann::ordered_json(it.key()).dump() << ": ";
      emit(os, it.value(), indent + 2);
    }
    os << "\n" << pad << "}";
    return;
  }
  if (v.is_array()) {
    const bool flat = std::all_of(v.begin(), v.end(), [](const auto& x) { return x.is_primitive(); });
    if (flat || v.empty()) {
      os << v.dump();
      return;
    }
    os << "[\n";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) os << ",\n";
      os << inner << v[i].dump();
    }
    os << "\n" << pad << "]";
    return;
  }
  os << v.dump();
}

}  // namespace

PolyhedronDocument parse_document(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line and column.
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size() + 1);
    int line = 1;
    int column = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    if (auto pos = what.find("parse error"); pos != std::string::npos) what = what.substr(pos);
    throw DocumentError(what, line, column);
  }
  if (!root.is_object()) fail("document must be an object");
  const json& format = require(root, "format", "document");
  if (!format.is_string() || format.get<std::string>() != kFormat) fail("document: unsupported format (expected imp-1)");

  PolyhedronDocument doc;
  const json& vs = require(root, "vertices", "document");
  const json& ss = require(root, "simplices", "document");
  if (!vs.is_array() || !ss.is_array()) fail("document: vertices and simplices must be arrays");
  std::vector<std::int64_t> labels;
  for (const auto& v : vs) labels.push_back(as_label(v, "vertices"));
  std::vector<std::vector<std::int64_t>> simplices;
  for (const auto& s : ss) {
    if (!s.is_array()) fail("simplices: each simplex must be an array");
    std::vector<std::int64_t> sx;
    for (const auto& v : s) sx.push_back(as_label(v, "simplices"));
    simplices.push_back(std::move(sx));
  }
  try {
    doc.complex = std::make_shared<const SimplicialComplex>(SimplicialComplex::build(std::move(labels), simplices));
  } catch (const ComplexError& e) {
    fail(std::string("complex: ") + e.what());
  }
  const SimplicialComplex& X = *doc.complex;

  if (auto mt = root.find("metric"); mt != root.end()) {
    if (!mt->is_array()) fail("metric: must be an array");
    for (std::size_t i = 0; i < mt->size(); ++i) {
      const json& entry = (*mt)[i];
      const std::string where = "metric[" + std::to_string(i) + "]";
      const json& e = require(entry, "edge", where);
      if (!e.is_array() || e.size() != 2) fail(where + ": edge must be a pair of vertex ids");
      const std::int64_t la = as_label(e[0], where);
      const std::int64_t lb = as_label(e[1], where);
      Edge edge;
      try {
        edge = make_edge(X.id_of(la), X.id_of(lb));
      } catch (const ComplexError& err) {
        fail(where + ": " + err.what());
      }
      if (X.edge_index(edge) < 0) fail(where + ": " + edge_name(la, lb) + " is not an edge of the complex");
      if (doc.metric.has(edge)) fail(where + ": duplicate entry for edge " + edge_name(la, lb));
      const json& unit = require(entry, "unit", where);
      const double value = as_number(require(entry, "value", where), where);
      if (unit == "energy") {
        doc.metric.set(edge, value);
      } else if (unit == "signed_length") {
        doc.metric.set(edge, signed_square(value));
      } else {
        fail(where + ": unit must be \"energy\" or \"signed_length\"");
      }
    }
    if (!metric_complete(doc)) {
      for (const Edge& e : X.edges())
        if (!doc.metric.has(e)) fail("metric: missing entry for edge " + edge_name(X.label(e.a), X.label(e.b)));
    }
  }

  if (auto m = root.find("map"); m != root.end()) doc.map = parse_map(*m, "map", doc.complex);
  if (auto m = root.find("source_map"); m != root.end()) {
    doc.source_map = parse_map(*m, "source_map", doc.complex);
    if (!doc.source_map->is_on_root()) fail("source_map: must live on the complex itself");
  }

  if (auto s = root.find("schedule"); s != root.end()) {
    if (!s->is_object()) fail("schedule: must be an object");
    Schedule sch;
    sch.base = as_label(require(*s, "base", "schedule"), "schedule.base");
    try {
      X.id_of(sch.base);
    } catch (const ComplexError& e) {
      fail(std::string("schedule.base: ") + e.what());
    }
    const json& eps = require(*s, "eps", "schedule");
    if (eps.is_number()) {
      sch.epsilon.push_back(as_number(eps, "schedule.eps"));
    } else if (eps.is_array() && !eps.empty()) {
      for (const auto& x : eps) sch.epsilon.push_back(as_number(x, "schedule.eps"));
    } else {
      fail("schedule.eps: expected a number or a nonempty list");
    }
    for (double x : sch.epsilon)
      if (!(x > 0.0)) fail("schedule.eps: values must be positive");
    if (auto seed = s->find("seed"); seed != s->end()) {
      if (!seed->is_number_unsigned()) fail("schedule.seed: expected a non-negative integer");
      sch.seed = seed->get<std::uint64_t>();
    }
    if (auto mode = s->find("mode"); mode != s->end()) {
      if (*mode == "embed") sch.mode = Mode::embed;
      else if (*mode == "isometry") sch.mode = Mode::isometry;
      else fail("schedule.mode: expected \"embed\" or \"isometry\"");
    }
    if (auto margin = s->find("margin"); margin != s->end()) {
      sch.margin = as_number(*margin, "schedule.margin");
      if (!(*sch.margin > 0.0)) fail("schedule.margin: must be positive");
    }
    doc.schedule = std::move(sch);
  }
  if (auto r = root.find("report"); r != root.end()) doc.report = *r;
  return doc;
}

std::string serialize_document(const PolyhedronDocument& doc) {
  const SimplicialComplex& X = doc.root();
  nlohmann::ordered_json out;
  out["format"] = kFormat;
  out["vertices"] = X.labels();
  std::vector<const Simplex*> order;
  for (const auto& s : X.simplices()) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [](const Simplex* a, const Simplex* b) { return a->size() < b->size(); });
  json simplices = json::array();
  for (const Simplex* s : order) {
    json labels = json::array();
    for (VertexId v : *s) labels.push_back(X.label(v));
    simplices.push_back(labels);
  }
  out["simplices"] = simplices;
  if (doc.metric.size() > 0) {
    json metric = json::array();
    for (const Edge& e : X.edges()) {
      if (!doc.metric.has(e)) continue;
      metric.push_back({{"edge", {X.label(e.a), X.label(e.b)}}, {"unit", "energy"}, {"value", doc.metric.energy(e)}});
    }
    out["metric"] = metric;
  }
  if (doc.map) out["map"] = map_json(*doc.map, X);
  if (doc.source_map) out["source_map"] = map_json(*doc.source_map, X);
  if (doc.schedule) {
    nlohmann::ordered_json s;
    s["base"] = doc.schedule->base;
    s["eps"] = doc.schedule->epsilon;
    s["seed"] = doc.schedule->seed;
    if (doc.schedule->mode) s["mode"] = *doc.schedule->mode == Mode::embed ? "embed" : "isometry";
    if (doc.schedule->margin) s["margin"] = *doc.schedule->margin;
    out["schedule"] = s;
  }
  if (!doc.report.is_null()) out["report"] = nlohmann::ordered_json::parse(doc.report.dump());
  std::ostringstream os;
  emit(os, out, 0);
  os << "\n";
  return os.str();
}

PolyhedronDocument load_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DocumentError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_document(buf.str());
}

void save_document(const PolyhedronDocument& doc, const std::filesystem::path& path) {
  const std::string text = serialize_document(doc);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DocumentError("cannot write " + path.string());
  out << text;
  if (!out) throw DocumentError("write failed for " + path.string());
}

bool metric_complete(const PolyhedronDocument& doc) {
  return doc.metric.size() == doc.root().edges().size();
}

json to_json(const EnergyReport& r, const SimplicialComplex& root, const SimplicialComplex& child) {
  json out;
  out["pass"] = r.pass;
  out["max_relative_error"] = number(r.max_relative_error);
  out["edges_checked"] = r.edges_checked;
  if (r.worst_child) {
    out["worst_child_edge"] = {child.label(r.worst_child->a), child.label(r.worst_child->b)};
    json parent = json::array();
    for (VertexId v : r.worst_parent) parent.push_back(root.label(v));
    out["worst_parent"] = parent;
  }
  if (!r.reason.empty()) out["reason"] = r.reason;
  return out;
}

json to_json(const EmbeddingReport& r, const SimplicialComplex& child) {
  json out;
  out["pass"] = r.pass;
  out["pairs_tested"] = r.pairs_tested;
  out["slack"] = number(r.slack);
  if (r.offending) {
    auto edge = [&](Edge e) { return json{child.label(e.a), child.label(e.b)}; };
    out["offending"] = {edge(r.offending->first), edge(r.offending->second)};
  }
  if (!r.reason.empty()) out["reason"] = r.reason;
  return out;
}

json to_json(const ClosenessReport& r) {
  json out;
  out["pass"] = r.pass;
  out["sup_deviation"] = numbers(r.sup_deviation);
  out["epsilon"] = numbers(r.epsilon);
  out["samples"] = r.samples;
  return out;
}

json to_json(const VerificationReport& r, const SimplicialComplex& root, const SimplicialComplex& child) {
  json out;
  out["pass"] = r.pass();
  out["energy"] = to_json(r.energy, root, child);
  if (r.embedding) out["embedding"] = to_json(*r.embedding, child);
  if (r.closeness) out["closeness"] = to_json(*r.closeness);
  return out;
}

json to_json(const PipelineReport& r, const SimplicialComplex& root, const SimplicialComplex& child) {
  json out;
  out["mode"] = r.mode == Mode::embed ? "embed" : "isometry";
  if (r.mode == Mode::embed) {
    out["guard"] = {{"delta", numbers(r.guard.delta)},
                    {"mu", numbers(r.guard.mu)},
                    {"epsilon_eff", numbers(r.guard.epsilon_eff)},
                    {"edge_mu", numbers(r.guard.edge_mu)},
                    {"edge_epsilon_eff", numbers(r.guard.edge_epsilon_eff)}};
    out["perturbation"] = {{"attempts", r.perturbation_attempts}, {"scale", r.perturbation_scale}};
    out["reperturbation"] = {{"attempts", r.reperturbation_attempts}, {"scale", r.reperturbation_scale}};
  }
  out["construction_attempts"] = r.construction_attempts;
  out["vertices_after_negative"] = r.vertices_after_negative;
  out["vertices_final"] = r.vertices_final;
  out["verification"] = to_json(r.verification, root, child);
  out["pass"] = r.pass();
  return out;
}

}  // namespace imp
