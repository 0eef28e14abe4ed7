#include "imp/complex.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace imp {

Edge make_edge(VertexId u, VertexId v) {
  if (u == v) throw ComplexError("degenerate edge at vertex " + std::to_string(u));
  return u < v ? Edge{u, v} : Edge{v, u};
}

namespace {

void add_faces(const Simplex& s, SimplexSet& out) {
  const std::size_t n = s.size();
  // Every nonempty subset, enumerated by bitmask; simplices here are small.
  if (n > 20) throw ComplexError("simplex too large: " + std::to_string(n) + " vertices");
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    Simplex face;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) face.push_back(s[i]);
    out.insert(std::move(face));
  }
}

}  // namespace

SimplicialComplex SimplicialComplex::build(std::vector<std::int64_t> labels,
                                           const std::vector<std::vector<std::int64_t>>& simplices) {
  if (simplices.empty()) throw ComplexError("simplex list is empty");
  SimplicialComplex c;
  c.labels_ = std::move(labels);
  for (std::size_t i = 0; i < c.labels_.size(); ++i) {
    if (!c.by_label_.emplace(c.labels_[i], static_cast<VertexId>(i)).second)
      throw ComplexError("duplicate vertex id " + std::to_string(c.labels_[i]));
  }
  std::set<Simplex> given;
  for (const auto& raw : simplices) {
    if (raw.empty()) throw ComplexError("empty simplex");
    Simplex s;
    for (std::int64_t l : raw) {
      auto it = c.by_label_.find(l);
      if (it == c.by_label_.end())
        throw ComplexError("simplex references unknown vertex " + std::to_string(l));
      s.push_back(it->second);
    }
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end())
      throw ComplexError("simplex repeats a vertex");
    given.insert(std::move(s));
  }
  for (const auto& s : given) add_faces(s, c.simplices_);
  c.closure_added_ = c.simplices_.size() - given.size();
  c.index();
  return c;
}

SimplicialComplex SimplicialComplex::from_dense(int vertex_count, const std::vector<Simplex>& simplices,
                                                std::vector<std::int64_t> labels) {
  SimplicialComplex c;
  if (labels.empty()) {
    labels.resize(vertex_count);
    std::iota(labels.begin(), labels.end(), 0);
  }
  if (static_cast<int>(labels.size()) != vertex_count) throw ComplexError("label count mismatch");
  c.labels_ = std::move(labels);
  for (int i = 0; i < vertex_count; ++i) {
    if (!c.by_label_.emplace(c.labels_[i], i).second)
      throw ComplexError("duplicate vertex id " + std::to_string(c.labels_[i]));
  }
  for (Simplex s : simplices) {
    std::sort(s.begin(), s.end());
    for (VertexId v : s)
      if (v < 0 || v >= vertex_count) throw ComplexError("simplex references unknown vertex " + std::to_string(v));
    if (s.size() <= 2) {
      // Fast path for graphs.
      for (VertexId v : s) c.simplices_.insert(Simplex{v});
      c.simplices_.insert(std::move(s));
    } else {
      add_faces(s, c.simplices_);
    }
  }
  c.index();
  return c;
}

void SimplicialComplex::index() {
  edges_.clear();
  edge_ids_.clear();
  incident_.assign(labels_.size(), {});
  dimension_ = -1;
  for (const auto& s : simplices_) {
    dimension_ = std::max(dimension_, static_cast<int>(s.size()) - 1);
    if (s.size() == 2) {
      Edge e{s[0], s[1]};
      edge_ids_.emplace(e, static_cast<int>(edges_.size()));
      incident_[e.a].push_back(static_cast<int>(edges_.size()));
      incident_[e.b].push_back(static_cast<int>(edges_.size()));
      edges_.push_back(e);
    }
  }
}

VertexId SimplicialComplex::id_of(std::int64_t label) const {
  auto it = by_label_.find(label);
  if (it == by_label_.end()) throw ComplexError("unknown vertex id " + std::to_string(label));
  return it->second;
}

int SimplicialComplex::edge_index(Edge e) const {
  auto it = edge_ids_.find(e);
  return it == edge_ids_.end() ? -1 : it->second;
}

SimplexSet closed_star(const SimplicialComplex& complex, VertexId v) {
  if (v < 0 || v >= complex.vertex_count()) throw ComplexError("unknown vertex id " + std::to_string(v));
  SimplexSet star;
  for (const auto& s : complex.simplices())
    if (std::binary_search(s.begin(), s.end(), v)) add_faces(s, star);
  return star;
}

ShellDecomposition shell_decomposition(const SimplicialComplex& complex, VertexId v) {
  if (v < 0 || v >= complex.vertex_count()) throw ComplexError("unknown vertex id " + std::to_string(v));

  // Graph distance from v in the 1-skeleton. A simplex lies in St^k(v) iff
  // some coface touches the ball of radius k-1, so its shell index is
  // 1 + min over cofaces of the closest vertex distance.
  constexpr int unreachable = std::numeric_limits<int>::max();
  std::vector<int> dist(complex.vertex_count(), unreachable);
  std::vector<VertexId> queue{v};
  dist[v] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const VertexId u = queue[head];
    for (int ei : complex.incident_edges(u)) {
      const Edge& e = complex.edges()[ei];
      const VertexId w = e.a == u ? e.b : e.a;
      if (dist[w] == unreachable) {
        dist[w] = dist[u] + 1;
        queue.push_back(w);
      }
    }
  }

  std::map<Simplex, int> level;
  for (const auto& s : complex.simplices()) {
    int m = unreachable;
    for (VertexId u : s) m = std::min(m, dist[u]);
    level.emplace(s, m);
  }
  std::vector<const Simplex*> by_size;
  for (const auto& s : complex.simplices()) by_size.push_back(&s);
  std::stable_sort(by_size.begin(), by_size.end(),
                   [](const Simplex* x, const Simplex* y) { return x->size() > y->size(); });
  for (const Simplex* s : by_size) {
    if (s->size() < 2) continue;
    const int m = level[*s];
    for (std::size_t drop = 0; drop < s->size(); ++drop) {
      Simplex face;
      for (std::size_t i = 0; i < s->size(); ++i)
        if (i != drop) face.push_back((*s)[i]);
      int& f = level[face];
      f = std::min(f, m);
    }
  }

  ShellDecomposition d;
  d.base = v;
  std::map<int, SimplexSet> grouped;
  for (auto& [s, m] : level) grouped[m].insert(s);
  for (auto& [m, shell] : grouped) {
    for (const auto& s : shell) d.index.emplace(s, d.shells.size());
    d.shells.push_back(std::move(shell));
  }
  return d;
}

std::size_t ShellDecomposition::shell_of(const Simplex& s) const {
  auto it = index.find(s);
  if (it != index.end()) return it->second;
  for (std::size_t k = 0; k < shells.size(); ++k)
    if (shells[k].count(s)) return k;
  throw ComplexError("simplex not in any shell");
}

CarrierMap CarrierMap::identity(const SimplicialComplex& complex) {
  std::vector<Carrier> c(complex.vertex_count());
  for (VertexId v = 0; v < complex.vertex_count(); ++v) c[v] = Carrier{{v}, {1.0}};
  return CarrierMap(std::move(c));
}

bool CarrierMap::root_edge_of(VertexId u, VertexId v, Edge& root, double& tu, double& tv) const {
  const Carrier& cu = carriers_.at(u);
  const Carrier& cv = carriers_.at(v);
  Simplex joint = cu.support;
  joint.insert(joint.end(), cv.support.begin(), cv.support.end());
  std::sort(joint.begin(), joint.end());
  joint.erase(std::unique(joint.begin(), joint.end()), joint.end());
  if (joint.size() != 2) return false;
  root = Edge{joint[0], joint[1]};
  auto weight_on_b = [&](const Carrier& c) {
    for (std::size_t i = 0; i < c.support.size(); ++i)
      if (c.support[i] == root.b) return c.weights[i];
    return 0.0;
  };
  tu = weight_on_b(cu);
  tv = weight_on_b(cv);
  return true;
}

CarrierMap compose(const CarrierMap& child, const CarrierMap& middle) {
  std::vector<Carrier> out;
  out.reserve(child.size());
  for (const Carrier& c : child.carriers()) {
    std::map<VertexId, double> acc;
    for (std::size_t i = 0; i < c.support.size(); ++i) {
      const Carrier& m = middle[c.support[i]];
      for (std::size_t j = 0; j < m.support.size(); ++j) acc[m.support[j]] += c.weights[i] * m.weights[j];
    }
    Carrier r;
    for (auto [v, w] : acc) {
      if (w > 0.0) {
        r.support.push_back(v);
        r.weights.push_back(w);
      }
    }
    out.push_back(std::move(r));
  }
  return CarrierMap(std::move(out));
}

Subdivision subdivide_edges_at(const SimplicialComplex& complex, const std::map<Edge, std::vector<double>>& breaks) {
  const int n = complex.vertex_count();
  std::vector<Carrier> carriers = CarrierMap::identity(complex).carriers();
  std::vector<Simplex> simplices;
  std::vector<std::int64_t> labels = complex.labels();
  std::int64_t next_label = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;

  for (const auto& [e, ts] : breaks) {
    if (ts.empty()) continue;
    if (complex.edge_index(e) < 0) throw ComplexError("subdivision of an edge not in the complex");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (!(ts[i] > 0.0 && ts[i] < 1.0) || (i > 0 && !(ts[i] > ts[i - 1])))
        throw ComplexError("edge break parameters must be strictly increasing inside (0,1)");
    }
  }

  Subdivision out;
  int next = n;
  for (const auto& s : complex.simplices()) {
    if (s.size() == 1) {
      simplices.push_back(s);
      continue;
    }
    if (s.size() > 2) {
      for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = i + 1; j < s.size(); ++j) {
          auto it = breaks.find(Edge{s[i], s[j]});
          if (it != breaks.end() && !it->second.empty())
            throw ComplexError("cannot split an edge with a higher-dimensional coface");
        }
      simplices.push_back(s);
      continue;
    }
    Edge e{s[0], s[1]};
    auto it = breaks.find(e);
    if (it == breaks.end() || it->second.empty()) {
      simplices.push_back(s);
      continue;
    }
    VertexId prev = e.a;
    auto& chain = out.chains[e];
    for (double t : it->second) {
      VertexId nv = next++;
      chain.push_back(nv);
      carriers.push_back(Carrier{{e.a, e.b}, {1.0 - t, t}});
      labels.push_back(next_label++);
      simplices.push_back(Simplex{prev, nv});
      prev = nv;
    }
    simplices.push_back(Simplex{prev, e.b});
  }
  out.complex = SimplicialComplex::from_dense(next, simplices, std::move(labels));
  out.carrier = CarrierMap(std::move(carriers));
  return out;
}

Subdivision subdivide_edges(const SimplicialComplex& complex, const std::map<Edge, int>& plan) {
  std::map<Edge, std::vector<double>> breaks;
  for (const auto& [e, m] : plan) {
    if (m < 1) throw ComplexError("segment count must be at least 1");
    std::vector<double> ts;
    for (int j = 1; j < m; ++j) ts.push_back(static_cast<double>(j) / m);
    breaks.emplace(e, std::move(ts));
  }
  return subdivide_edges_at(complex, breaks);
}

}  // namespace imp
