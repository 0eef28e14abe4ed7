#include <algorithm>
#include <cmath>
#include <limits>

#include "imp/pipeline.hpp"

namespace imp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kConstructionAttempts = 4;

double schedule_at(std::span<const double> eps, std::size_t k) { return eps[std::min(k, eps.size() - 1)]; }

void check_request(const PipelineRequest& req) {
  if (!req.f.is_on_root()) throw PipelineError("f must be defined on the original complex");
  const SimplicialComplex& X = req.f.domain();
  if (X.dimension() > 1) throw PipelineError("only graphs (dimension 1) are supported");
  if (X.vertex_count() == 0) throw PipelineError("empty complex");
  if (req.base < 0 || req.base >= X.vertex_count()) throw PipelineError("unknown base vertex");
  if (req.epsilon.empty()) throw PipelineError("empty epsilon schedule");
  for (double e : req.epsilon)
    if (!(e > 0.0) || !std::isfinite(e)) throw PipelineError("epsilon values must be positive and finite");
  if (!(req.margin > 0.0)) throw PipelineError("H margin must be positive");
  if (!req.positive || !req.negative) throw PipelineError("both engines are required");
  req.g.check_covers(X);
  const MinkowskiSignature sig = req.f.signature();
  if (req.mode == Mode::embed && (sig.p < 1 || sig.q < 1 || sig.p + sig.q < 3))
    throw PipelineError("embedding needs p >= 1, q >= 1 and p + q >= 3");
  if (req.mode == Mode::isometry && (sig.p < 1 || sig.q < 1))
    throw PipelineError("isometry needs p >= 1 and q >= 1");
}

// Images of a child complex obtained by evaluating `parent` affinely at the
// child carriers (relative to parent's domain).
std::vector<Eigen::VectorXd> pull_back(const CarrierMap& child, const std::vector<Eigen::VectorXd>& parent) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(child.size());
  for (const Carrier& c : child.carriers()) {
    Eigen::VectorXd x = c.weights[0] * parent[c.support[0]];
    for (std::size_t i = 1; i < c.support.size(); ++i) x += c.weights[i] * parent[c.support[i]];
    out.push_back(std::move(x));
  }
  return out;
}

// Energy of a displacement restricted to coordinates [lo, hi), of which the
// first `pos` are positive.
double block_energy(const Eigen::VectorXd& d, int lo, int hi, int pos) {
  double e = 0.0;
  for (int i = lo; i < hi; ++i) e += (i - lo < pos ? 1.0 : -1.0) * d[i] * d[i];
  return e;
}

struct ShellInfo {
  ShellDecomposition shells;
  std::vector<double> vertex_eps;  // min epsilon over shells touching a vertex
};

ShellInfo shell_info(const SimplicialComplex& X, VertexId base, std::span<const double> eps) {
  ShellInfo info{shell_decomposition(X, base), {}};
  info.vertex_eps.assign(X.vertex_count(), kInf);
  for (VertexId v = 0; v < X.vertex_count(); ++v) {
    double m = schedule_at(eps, info.shells.shell_of({v}));
    for (int ei : X.incident_edges(v)) {
      const Edge& e = X.edges()[ei];
      m = std::min(m, schedule_at(eps, info.shells.shell_of({e.a, e.b})));
    }
    info.vertex_eps[v] = m;
  }
  return info;
}

// Parent edge and its shell for a child edge whose carrier is relative to X.
std::size_t parent_shell(const CarrierMap& carrier, const ShellDecomposition& shells, VertexId u, VertexId v,
                         Edge& parent, double& tu, double& tv) {
  if (!carrier.root_edge_of(u, v, parent, tu, tv)) throw PipelineError("child edge is not carried by a parent edge");
  return shells.shell_of({parent.a, parent.b});
}

VerificationReport run_verification(const PipelineRequest& req, const PLMap& h, const ShellDecomposition& shells,
                                    bool embedding) {
  VerificationReport rep;
  rep.energy = verify_isometry(h, req.g);
  if (embedding) rep.embedding = verify_embedding(h, std::nullopt, &req.g);
  // h - f is affine on every child edge, so its norm peaks at an endpoint;
  // two samples per edge give the exact sup.
  rep.closeness = verify_closeness(req.f, h, shells, req.epsilon, 2);
  return rep;
}

std::vector<EdgeViolation> check_negative_target(const EdgeMetric& target, const PLMap& minus) {
  std::vector<EdgeViolation> bad;
  for (const Edge& e : minus.domain().edges()) {
    const double t = target.energy(e);
    const double len2 = (minus.image(e.b) - minus.image(e.a)).squaredNorm();
    if (!(t < 0.0) || !(len2 < -t)) bad.push_back({e, len2 + t});
  }
  return bad;
}

}  // namespace

PipelineResult isometric_embed(const PipelineRequest& req) {
  if (req.mode != Mode::embed) throw PipelineError("isometric_embed called in isometry mode");
  check_request(req);
  const SimplicialComplex& X = req.f.domain();
  const MinkowskiSignature sig = req.f.signature();
  const int N = sig.dimension();
  const ShellInfo info = shell_info(X, req.base, req.epsilon);
  const ShellDecomposition& shells = info.shells;

  PipelineReport report;
  report.mode = Mode::embed;

  // General position: f an embedding, f+ (+) f* a local embedding, and f*
  // separating the endpoints of every edge so it is monotone along chains.
  std::vector<int> prefix(N - 1);
  for (int i = 0; i < N - 1; ++i) prefix[i] = i;
  double diameter = 0.0;
  for (const auto& x : req.f.images())
    for (const auto& y : req.f.images()) diameter = std::max(diameter, (x - y).norm());
  const double slack = 1e-12 * std::max(1.0, diameter);
  auto star_separates = [N, slack](const PLMap& m) {
    for (const Edge& e : m.domain().edges()) {
      const Eigen::VectorXd d = m.image(e.b) - m.image(e.a);
      if (!(d.segment(1, N - 2).cwiseAbs().maxCoeff() > slack)) return false;
    }
    return true;
  };
  const std::vector<Predicate> first_predicates{
      [slack](const PLMap& m) { return is_injective(m, slack); },
      [&prefix](const PLMap& m) { return is_local_embedding(m, prefix); },
      star_separates,
  };
  std::vector<double> caps(X.vertex_count());
  for (VertexId v = 0; v < X.vertex_count(); ++v) caps[v] = info.vertex_eps[v] / 8.0;
  const Perturbation p1 = perturb_general_position(req.f, caps, req.seed, first_predicates);
  report.perturbation_attempts = p1.attempts;
  report.perturbation_scale = p1.scale;
  const PLMap& fp = p1.map;

  report.guard = compute_guard(fp, req.g, req.base, req.epsilon, GuardRule::structural);
  const EmbeddingGuard& guard = report.guard;
  const CoordinateSplit split = split_coordinates(fp, 1);
  const EdgeMetric gf = induced_edge_energies(fp);
  const EdgeMetric H = construct_H(req.g, gf, req.margin);

  // Negative engine target: H - E_f+ - E_f*.
  std::map<Edge, double> neg_target;
  for (const Edge& e : X.edges()) {
    const Eigen::VectorXd d = fp.image(e.b) - fp.image(e.a);
    neg_target.emplace(e, H.energy(e) - block_energy(d, 0, N - 1, sig.p));
  }
  const EdgeMetric negative_target(std::move(neg_target));
  if (auto bad = check_negative_target(negative_target, split.minus); !bad.empty())
    throw PipelineError("negative engine precondition fails after H", std::move(bad));

  // For every parent edge: the f* coordinate with the largest change, and its sign.
  std::map<Edge, std::pair<int, double>> monotone;
  for (const Edge& e : X.edges()) {
    const Eigen::VectorXd d = fp.image(e.b) - fp.image(e.a);
    Eigen::Index c = 0;
    d.segment(1, N - 2).cwiseAbs().maxCoeff(&c);
    monotone.emplace(e, std::make_pair(static_cast<int>(c) + 1, d[c + 1] > 0.0 ? 1.0 : -1.0));
  }

  PipelineResult result;
  for (int attempt = 0; attempt < kConstructionAttempts; ++attempt) {
    const double factor = std::ldexp(1.0, -attempt);
    const std::uint64_t salt = req.seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(attempt + 1);

    std::vector<double> acc_neg;
    for (std::size_t i = 0; i < X.edges().size(); ++i) acc_neg.push_back(factor * guard.edge_epsilon_eff[i] / 3.0);
    EngineRequest nreq{split.minus, negative_target, req.base, req.epsilon, acc_neg, {}};
    nreq.options.seed = salt;
    const EngineResult neg = req.negative(nreq);
    const SimplicialComplex& T1 = neg.output.domain();
    report.vertices_after_negative = T1.vertex_count();

    // f+ and f* affine on T', h- from the engine.
    std::vector<Eigen::VectorXd> images1 = pull_back(neg.carrier, fp.images());
    for (VertexId v = 0; v < T1.vertex_count(); ++v) images1[v][N - 1] = neg.output.image(v)[0];
    const PLMap m1(neg.output.domain_ptr(), neg.output.carrier_ptr(), sig, std::move(images1));

    // Re-perturb f* and h- only.
    std::vector<int> tail(N - 1);
    for (int i = 0; i < N - 1; ++i) tail[i] = i + 1;
    std::vector<double> caps1(T1.vertex_count());
    for (VertexId v = 0; v < T1.vertex_count(); ++v) {
      const Carrier& c = neg.carrier[v];
      double m = kInf;
      if (c.support.size() == 1) {
        const VertexId r = c.support[0];
        m = info.vertex_eps[r];
        if (X.incident_edges(r).empty()) m = std::min(m, guard.mu[shells.shell_of({r})]);
        for (int ei : X.incident_edges(r)) m = std::min(m, guard.edge_mu[ei]);
      } else {
        const int ei = X.edge_index(make_edge(c.support[0], c.support[1]));
        m = std::min(schedule_at(req.epsilon, shells.shell_of(c.support)), guard.edge_mu[ei]);
      }
      caps1[v] = factor * m / 16.0;
    }
    const EdgeMetric& g = req.g;
    const CarrierMap& carrier1 = neg.carrier;
    auto chains_monotone = [&](const PLMap& m) {
      for (const Edge& s : m.domain().edges()) {
        Edge parent;
        double tu, tv;
        if (!carrier1.root_edge_of(s.a, s.b, parent, tu, tv)) return false;
        const auto [c, sign] = monotone.at(parent);
        const double step = (m.image(s.b)[c] - m.image(s.a)[c]) * (tv > tu ? 1.0 : -1.0);
        if (!(step * sign > 0.0)) return false;
      }
      return true;
    };
    auto inequality_holds = [&](const PLMap& m) {
      for (const Edge& s : m.domain().edges()) {
        Edge parent;
        double tu, tv;
        if (!carrier1.root_edge_of(s.a, s.b, parent, tu, tv)) return false;
        const Eigen::VectorXd d = m.image(s.b) - m.image(s.a);
        const double tau = tv - tu;
        const double lhs = g.energy(parent) * tau * tau - block_energy(d, 1, N, sig.p - 1);
        if (!(lhs > d[0] * d[0])) return false;
      }
      return true;
    };
    const std::vector<Predicate> second_predicates{
        chains_monotone,
        [&tail](const PLMap& m) { return is_local_embedding(m, tail); },
        inequality_holds,
    };
    Perturbation p2;
    try {
      p2 = perturb_general_position(m1, caps1, salt ^ 0x5bd1e995ull, second_predicates, tail);
    } catch (const PipelineError&) {
      if (attempt + 1 == kConstructionAttempts) throw;
      continue;
    }
    report.reperturbation_attempts = p2.attempts;
    report.reperturbation_scale = p2.scale;
    const PLMap& m2 = p2.map;

    // Positive engine on T' with target E_g tau^2 - E_f*(s) - E_h-(s).
    std::map<Edge, double> pos_target;
    std::vector<double> acc_pos;
    for (const Edge& s : T1.edges()) {
      Edge parent;
      double tu, tv;
      parent_shell(carrier1, shells, s.a, s.b, parent, tu, tv);
      const Eigen::VectorXd d = m2.image(s.b) - m2.image(s.a);
      const double tau = tv - tu;
      pos_target.emplace(s, req.g.energy(parent) * tau * tau - block_energy(d, 1, N, sig.p - 1));
      acc_pos.push_back(factor * guard.edge_epsilon_eff[X.edge_index(parent)] / 3.0);
    }
    std::vector<Eigen::VectorXd> plus_images;
    plus_images.reserve(T1.vertex_count());
    for (const auto& x : m2.images()) plus_images.push_back(x.head(1));
    const PLMap plus1 = m2.with_images({1, 0}, std::move(plus_images));
    EngineRequest preq{plus1, EdgeMetric(std::move(pos_target)), 0, req.epsilon, acc_pos, {}};
    preq.options.seed = salt;
    const EngineResult pos = req.positive(preq);
    const SimplicialComplex& T2 = pos.output.domain();

    std::vector<Eigen::VectorXd> images2 = pull_back(pos.carrier, m2.images());
    for (VertexId v = 0; v < T2.vertex_count(); ++v) images2[v][0] = pos.output.image(v)[0];
    result.h = PLMap(pos.output.domain_ptr(), pos.output.carrier_ptr(), sig, std::move(images2));
    report.vertices_final = T2.vertex_count();
    report.construction_attempts = attempt + 1;
    report.verification = run_verification(req, result.h, shells, true);
    if (report.verification.pass()) break;
  }
  result.report = std::move(report);
  return result;
}

PipelineResult pl_isometry(const PipelineRequest& req) {
  if (req.mode != Mode::isometry) throw PipelineError("pl_isometry called in embed mode");
  check_request(req);
  const SimplicialComplex& X = req.f.domain();
  const MinkowskiSignature sig = req.f.signature();
  const int N = sig.dimension();
  const ShellDecomposition shells = shell_decomposition(X, req.base);

  PipelineReport report;
  report.mode = Mode::isometry;
  const std::vector<MinkowskiSignature> blocks{{sig.p, 0}, {0, sig.q}};
  const std::vector<PLMap> parts = split_map(req.f, blocks);
  const PLMap& plus = parts[0];
  const PLMap& minus = parts[1];
  const EdgeMetric H = construct_H(req.g, induced_edge_energies(req.f), req.margin);

  std::map<Edge, double> neg_target;
  std::vector<double> acc_neg;
  for (const Edge& e : X.edges()) {
    neg_target.emplace(e, H.energy(e) - (plus.image(e.b) - plus.image(e.a)).squaredNorm());
    acc_neg.push_back(schedule_at(req.epsilon, shells.shell_of({e.a, e.b})) / 2.0);
  }
  const EdgeMetric negative_target(std::move(neg_target));
  if (auto bad = check_negative_target(negative_target, minus); !bad.empty())
    throw PipelineError("negative engine precondition fails after H", std::move(bad));

  EngineRequest nreq{minus, negative_target, req.base, req.epsilon, acc_neg, {}};
  nreq.options.seed = req.seed;
  const EngineResult neg = req.negative(nreq);
  const SimplicialComplex& T1 = neg.output.domain();
  report.vertices_after_negative = T1.vertex_count();

  std::vector<Eigen::VectorXd> plus1 = pull_back(neg.carrier, plus.images());
  std::map<Edge, double> pos_target;
  std::vector<double> acc_pos;
  for (const Edge& s : T1.edges()) {
    Edge parent;
    double tu, tv;
    const std::size_t k = parent_shell(neg.carrier, shells, s.a, s.b, parent, tu, tv);
    const double tau = tv - tu;
    const double hminus = (neg.output.image(s.b) - neg.output.image(s.a)).squaredNorm();
    pos_target.emplace(s, req.g.energy(parent) * tau * tau + hminus);
    acc_pos.push_back(schedule_at(req.epsilon, k) / 2.0);
  }
  const PLMap plus_map(neg.output.domain_ptr(), neg.output.carrier_ptr(), {sig.p, 0}, std::move(plus1));
  EngineRequest preq{plus_map, EdgeMetric(std::move(pos_target)), 0, req.epsilon, acc_pos, {}};
  preq.options.seed = req.seed;
  const EngineResult pos = req.positive(preq);
  const SimplicialComplex& T2 = pos.output.domain();

  const std::vector<Eigen::VectorXd> minus2 = pull_back(pos.carrier, neg.output.images());
  std::vector<Eigen::VectorXd> images(T2.vertex_count(), Eigen::VectorXd(N));
  for (VertexId v = 0; v < T2.vertex_count(); ++v) {
    images[v].head(sig.p) = pos.output.image(v);
    images[v].tail(sig.q) = minus2[v];
  }
  PipelineResult result;
  result.h = PLMap(pos.output.domain_ptr(), pos.output.carrier_ptr(), sig, std::move(images));
  report.vertices_final = T2.vertex_count();
  report.construction_attempts = 1;
  report.verification = run_verification(req, result.h, shells, false);
  result.report = std::move(report);
  return result;
}

PipelineResult run_pipeline(const PipelineRequest& request) {
  return request.mode == Mode::embed ? isometric_embed(request) : pl_isometry(request);
}

}  // namespace imp
