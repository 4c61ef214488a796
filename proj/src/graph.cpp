#include "tiler/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace tiler {

void Embedding::rebuild_positions() {
  position.assign(tail.size(), -1);
  for (const auto& rot : rotation) {
    for (int i = 0; i < static_cast<int>(rot.size()); ++i) position[rot[i]] = i;
  }
}

DartId Embedding::face_successor(DartId d) const {
  const VertexId v = head(d);
  const auto& rot = rotation[v];
  const int deg = static_cast<int>(rot.size());
  const int p = position[reverse(d)];
  return rot[(p - 1 + deg) % deg];
}

std::optional<VertexId> PlanarGraph::find_vertex(const std::string& label) const {
  auto it = label_index_.find(label);
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<EdgeId> PlanarGraph::find_edge(const std::string& id) const {
  auto it = edge_index_.find(id);
  if (it == edge_index_.end()) return std::nullopt;
  return it->second;
}

Rational PlanarGraph::exact_conductance(EdgeId e) const {
  auto it = exact_overrides_.find(e);
  if (it != exact_overrides_.end()) return it->second;
  return Rational(edges_[e].conductance);
}

double PlanarGraph::pi(VertexId v) const {
  double total = 0.0;
  for (DartId d : embedding_.rotation[v]) total += edges_[edge_of(d)].conductance;
  return total;
}

// ---------------------------------------------------------------------------

VertexId GraphBuilder::add_vertex(std::string label) {
  labels_.push_back(std::move(label));
  rotation_.emplace_back();
  vertex_origin_.emplace_back();
  return static_cast<VertexId>(labels_.size() - 1);
}

EdgeId GraphBuilder::add_edge(VertexId u, VertexId v, double conductance, std::string id) {
  edges_.push_back(Edge{u, v, conductance, std::move(id)});
  edge_origin_.emplace_back();
  return static_cast<EdgeId>(edges_.size() - 1);
}

EdgeId GraphBuilder::add_edge_exact(VertexId u, VertexId v, const Rational& conductance,
                                    std::string id) {
  Rational c = conductance;
  c.canonicalize();
  const EdgeId e = add_edge(u, v, c.get_d(), std::move(id));
  if (Rational(edges_[e].conductance) != c) exact_.emplace(e, std::move(c));
  return e;
}

void GraphBuilder::set_rotation(VertexId v, std::vector<DartId> darts) {
  if (v < 0 || v >= num_vertices()) throw InputError("rotation: unknown vertex index");
  rotation_[v] = std::move(darts);
}

void GraphBuilder::set_vertex_origin(VertexId v, VertexOrigin origin) { vertex_origin_[v] = origin; }

void GraphBuilder::set_edge_origin(EdgeId e, EdgeOrigin origin) { edge_origin_[e] = origin; }

PlanarGraph GraphBuilder::build() && {
  PlanarGraph g;
  const int n = num_vertices();
  const int m = static_cast<int>(edges_.size());
  if (n == 0) throw InputError("vertices: graph has no vertices");

  for (int v = 0; v < n; ++v) {
    if (labels_[v].empty()) labels_[v] = "v" + std::to_string(v);
    if (!g.label_index_.emplace(labels_[v], v).second) {
      throw InputError("vertices: duplicate vertex id '" + labels_[v] + "'");
    }
  }
  for (int e = 0; e < m; ++e) {
    Edge& edge = edges_[e];
    if (edge.id.empty()) edge.id = "e" + std::to_string(e);
    if (edge.u < 0 || edge.u >= n || edge.v < 0 || edge.v >= n) {
      throw InputError("edges[" + std::to_string(e) + "]: endpoint is not a vertex");
    }
    if (!(edge.conductance > 0.0) || !std::isfinite(edge.conductance)) {
      throw InputError("edges[" + std::to_string(e) + "].conductance: must be positive, got " +
                       std::to_string(edge.conductance));
    }
    if (!g.edge_index_.emplace(edge.id, e).second) {
      throw InputError("edges[" + std::to_string(e) + "].id: duplicate edge id '" + edge.id + "'");
    }
  }

  Embedding& emb = g.embedding_;
  emb.num_vertices = n;
  emb.tail.resize(2 * m);
  std::vector<std::vector<DartId>> leaving(n);
  for (int e = 0; e < m; ++e) {
    emb.tail[forward_dart(e)] = edges_[e].u;
    emb.tail[backward_dart(e)] = edges_[e].v;
    leaving[edges_[e].u].push_back(forward_dart(e));
    leaving[edges_[e].v].push_back(backward_dart(e));
  }
  emb.rotation.resize(n);
  for (int v = 0; v < n; ++v) {
    if (!rotation_[v]) {
      emb.rotation[v] = leaving[v];
      continue;
    }
    std::vector<DartId> given = *rotation_[v];
    std::vector<DartId> sorted_given = given;
    std::sort(sorted_given.begin(), sorted_given.end());
    std::vector<DartId> expected = leaving[v];
    std::sort(expected.begin(), expected.end());
    if (sorted_given != expected) {
      for (DartId d : given) {
        if (d < 0 || d >= 2 * m || emb.tail[d] != v) {
          throw InputError("rotation[" + labels_[v] + "]: mentions a dart that does not leave it");
        }
      }
      throw InputError("rotation[" + labels_[v] +
                       "]: must list every dart leaving the vertex exactly once");
    }
    emb.rotation[v] = std::move(given);
  }
  emb.rebuild_positions();

  if (root_ < 0 || root_ >= n) throw InputError("root: missing or unknown root vertex");
  g.root_ = root_;
  g.sink_mask_.assign(n, 0);
  for (VertexId s : sinks_) {
    if (s < 0 || s >= n) throw InputError("sinks: unknown vertex");
    if (s == root_) throw InputError("sinks: the root cannot be a sink");
    if (g.sink_mask_[s]) throw InputError("sinks: duplicate sink '" + labels_[s] + "'");
    g.sink_mask_[s] = 1;
  }
  g.sinks_ = sinks_;

  // Connectivity.
  std::vector<char> seen(n, 0);
  std::queue<VertexId> frontier;
  frontier.push(root_);
  seen[root_] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const VertexId x = frontier.front();
    frontier.pop();
    for (DartId d : emb.rotation[x]) {
      const VertexId y = emb.head(d);
      if (!seen[y]) {
        seen[y] = 1;
        ++reached;
        frontier.push(y);
      }
    }
  }
  if (reached != n) {
    for (int v = 0; v < n; ++v) {
      if (!seen[v]) throw InputError("graph is disconnected: '" + labels_[v] + "' is unreachable from the root");
    }
  }

  g.edges_ = std::move(edges_);
  g.labels_ = std::move(labels_);
  g.vertex_origin_ = std::move(vertex_origin_);
  g.edge_origin_.resize(m);
  for (int e = 0; e < m; ++e) {
    g.edge_origin_[e] = edge_origin_[e].value_or(EdgeOrigin{e, 0.0, 1.0});
  }
  g.exact_overrides_ = std::move(exact_);
  g.kind_ = kind_;
  return g;
}

// ---------------------------------------------------------------------------

Faces trace_faces(const Embedding& emb) {
  Faces faces;
  const int darts = emb.num_darts();
  faces.face_of.assign(darts, -1);
  for (DartId start = 0; start < darts; ++start) {
    if (faces.face_of[start] != -1) continue;
    const int id = faces.count();
    std::vector<DartId> cycle;
    DartId d = start;
    do {
      faces.face_of[d] = id;
      cycle.push_back(d);
      d = emb.face_successor(d);
    } while (d != start);
    faces.cycles.push_back(std::move(cycle));
  }
  return faces;
}

int euler_characteristic(const Embedding& emb, const Faces& faces) {
  int vertices = 0;
  for (const auto& rot : emb.rotation) vertices += rot.empty() ? 0 : 1;
  if (emb.num_darts() == 0) return 2;  // a lone vertex bounds one face
  return vertices - emb.num_darts() / 2 + faces.count();
}

std::vector<int> DualGraph::degrees() const {
  std::vector<int> deg(num_vertices, 0);
  for (int f : dart_tail) ++deg[f];
  return deg;
}

DualGraph build_dual(const Embedding& emb, const Faces& faces, VertexId root) {
  DualGraph dual;
  dual.num_vertices = faces.count();
  dual.dart_tail = faces.face_of;
  dual.zeta = emb.rotation[root].empty() ? 0 : faces.face_of[emb.rotation[root].front()];
  return dual;
}

DualGraph build_dual(const PlanarGraph& g) {
  return build_dual(g.embedding(), trace_faces(g), g.root());
}

Embedding dual_embedding(const DualGraph& dual, const Faces& faces) {
  Embedding emb;
  emb.num_vertices = dual.num_vertices;
  emb.tail = dual.dart_tail;
  emb.rotation = faces.cycles;
  emb.rebuild_positions();
  return emb;
}

// ---------------------------------------------------------------------------

namespace {

std::string fresh_name(const std::string& base, const std::unordered_map<std::string, int>& taken) {
  if (!taken.count(base)) return base;
  for (int k = 2;; ++k) {
    std::string candidate = base + "#" + std::to_string(k);
    if (!taken.count(candidate)) return candidate;
  }
}

std::string format_parameter(double t) {
  std::ostringstream os;
  os.precision(6);
  os << t;
  return os.str();
}

struct Split {
  EdgeId edge;
  Rational t;
};

// Subdivides several distinct edges in one rebuild. New vertices and the
// v-side halves are appended in the order of `splits`; every other index is kept.
PlanarGraph subdivide_edges(const PlanarGraph& g, const std::vector<Split>& requested) {
  std::vector<Split> splits = requested;
  for (Split& s : splits) s.t.canonicalize();
  std::vector<int> split_of(g.num_edges(), -1);
  for (std::size_t i = 0; i < splits.size(); ++i) {
    const Split& s = splits[i];
    if (s.edge < 0 || s.edge >= g.num_edges()) throw InputError("subdivide: unknown edge");
    if (split_of[s.edge] >= 0) throw InputError("subdivide: edge listed twice");
    if (!(s.t > 0 && s.t < 1)) throw InputError("subdivide: parameter t must lie in (0, 1)");
    split_of[s.edge] = static_cast<int>(i);
  }

  GraphBuilder b;
  std::unordered_map<std::string, int> vertex_names;
  std::unordered_map<std::string, int> edge_names;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    b.add_vertex(g.label(v));
    vertex_names.emplace(g.label(v), v);
    if (g.vertex_origin(v)) b.set_vertex_origin(v, *g.vertex_origin(v));
  }
  for (EdgeId e = 0; e < g.num_edges(); ++e) edge_names.emplace(g.edge(e).id, e);

  std::vector<VertexId> dummy(splits.size());
  for (std::size_t i = 0; i < splits.size(); ++i) {
    const Split& s = splits[i];
    const EdgeOrigin origin = g.edge_origin(s.edge);
    const double td = s.t.get_d();
    std::string name = fresh_name(g.edge(s.edge).id + "@" + format_parameter(td), vertex_names);
    dummy[i] = b.add_vertex(name);
    vertex_names.emplace(name, dummy[i]);
    b.set_vertex_origin(dummy[i], VertexOrigin{origin.edge, origin.t0 + td * (origin.t1 - origin.t0)});
  }

  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edge(e);
    const int i = split_of[e];
    if (i < 0) {
      b.add_edge_exact(edge.u, edge.v, g.exact_conductance(e), edge.id);
      b.set_edge_origin(e, g.edge_origin(e));
      continue;
    }
    const EdgeOrigin origin = g.edge_origin(e);
    const double t_mid = origin.t0 + splits[i].t.get_d() * (origin.t1 - origin.t0);
    b.add_edge_exact(edge.u, dummy[i], Rational(g.exact_conductance(e) / splits[i].t), edge.id);
    b.set_edge_origin(e, EdgeOrigin{origin.edge, origin.t0, t_mid});
  }

  std::vector<std::vector<DartId>> rotation(g.num_vertices());
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    auto r = g.rotation(v);
    rotation[v].assign(r.begin(), r.end());
  }
  for (std::size_t i = 0; i < splits.size(); ++i) {
    const EdgeId e = splits[i].edge;
    const Edge& edge = g.edge(e);
    std::string id = fresh_name(edge.id + "'", edge_names);
    edge_names.emplace(id, 0);
    const EdgeId e2 = b.add_edge_exact(dummy[i], edge.v,
                                       Rational(g.exact_conductance(e) / (1 - splits[i].t)), id);
    const EdgeOrigin origin = g.edge_origin(e);
    const double t_mid = origin.t0 + splits[i].t.get_d() * (origin.t1 - origin.t0);
    b.set_edge_origin(e2, EdgeOrigin{origin.edge, t_mid, origin.t1});
    // At v the dart v -> u becomes v -> z along the new half; u keeps dart 2e.
    for (DartId& d : rotation[edge.v]) {
      if (d == backward_dart(e)) d = backward_dart(e2);
    }
    rotation.push_back({backward_dart(e), forward_dart(e2)});
  }
  for (VertexId v = 0; v < static_cast<VertexId>(rotation.size()); ++v) {
    b.set_rotation(v, std::move(rotation[v]));
  }
  b.set_root(g.root());
  for (VertexId s : g.sinks()) b.add_sink(s);
  b.set_kind(g.kind());
  return std::move(b).build();
}

}  // namespace

PlanarGraph subdivide_edge(const PlanarGraph& g, EdgeId e, const Rational& t) {
  return subdivide_edges(g, {Split{e, t}});
}

PlanarGraph subdivide_edge(const PlanarGraph& g, EdgeId e, double t) {
  if (!(t > 0.0 && t < 1.0)) throw InputError("subdivide: parameter t must lie in (0, 1)");
  return subdivide_edge(g, e, Rational(t));
}

InducedSubgraph induced_subgraph(const PlanarGraph& g, std::span<const char> keep, VertexId root,
                                 std::span<const VertexId> sinks_in_parent) {
  InducedSubgraph sub;
  sub.from_parent.assign(g.num_vertices(), kNoVertex);
  GraphBuilder b;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (!keep[v]) continue;
    sub.from_parent[v] = b.add_vertex(g.label(v));
    sub.to_parent.push_back(v);
    if (g.vertex_origin(v)) b.set_vertex_origin(sub.from_parent[v], *g.vertex_origin(v));
  }
  std::vector<EdgeId> edge_map(g.num_edges(), -1);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edge(e);
    if (!keep[edge.u] || !keep[edge.v]) continue;
    edge_map[e] = b.add_edge_exact(sub.from_parent[edge.u], sub.from_parent[edge.v],
                                   g.exact_conductance(e), edge.id);
    b.set_edge_origin(edge_map[e], g.edge_origin(e));
    sub.edge_to_parent.push_back(e);
  }
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (!keep[v]) continue;
    std::vector<DartId> rot;
    for (DartId d : g.rotation(v)) {
      const EdgeId e = edge_of(d);
      if (edge_map[e] < 0) continue;
      rot.push_back(2 * edge_map[e] + (d & 1));
    }
    b.set_rotation(sub.from_parent[v], std::move(rot));
  }
  if (root < 0 || !keep[root]) throw InputError("induced subgraph: root not kept");
  b.set_root(sub.from_parent[root]);
  for (VertexId s : sinks_in_parent) {
    if (keep[s]) b.add_sink(sub.from_parent[s]);
  }
  b.set_kind(g.kind());
  sub.graph = std::move(b).build();
  return sub;
}

// ---------------------------------------------------------------------------

template <TilerScalar S>
InducedSubgraph LevelCut<S>::upper() const {
  return induced_subgraph(graph, upper_mask, graph.root(), boundary);
}

template <TilerScalar S>
LevelCut<S> cut_at_level(const PlanarGraph& g, std::span<const S> heights, const S& requested) {
  S level = requested;
  if constexpr (is_exact_v<S>) level.canonicalize();
  if (static_cast<int>(heights.size()) != g.num_vertices()) {
    throw InputError("cut_at_level: heights must cover every vertex");
  }
  if (!(level > 0 && level < 1)) throw InputError("cut_at_level: level must lie in (0, 1)");
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (heights[v] == level) {
      throw InputError("cut_at_level: level collides with the height of vertex '" + g.label(v) +
                       "'; nudge the level");
    }
  }
  std::vector<Split> splits;
  std::vector<S> params;
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const S& hu = heights[g.edge(e).u];
    const S& hv = heights[g.edge(e).v];
    if ((hu > level && hv < level) || (hu < level && hv > level)) {
      S t = (hu - level) / (hu - hv);
      if constexpr (is_exact_v<S>) {
        splits.push_back(Split{e, t});
      } else {
        splits.push_back(Split{e, Rational(t)});
      }
      params.push_back(t);
    }
  }
  LevelCut<S> cut{level, subdivide_edges(g, splits), {}, {}, {}, {}, {}, {}};
  cut.heights.assign(heights.begin(), heights.end());
  for (std::size_t i = 0; i < splits.size(); ++i) {
    cut.heights.push_back(level);
    cut.boundary.push_back(g.num_vertices() + static_cast<VertexId>(i));
    cut.cut_edge.push_back(splits[i].edge);
    cut.cut_parameter.push_back(params[i]);
  }
  const int n = cut.graph.num_vertices();
  cut.upper_mask.assign(n, 0);
  cut.lower_mask.assign(n, 0);
  for (VertexId v = 0; v < n; ++v) {
    cut.upper_mask[v] = cut.heights[v] >= level ? 1 : 0;
    cut.lower_mask[v] = cut.heights[v] <= level ? 1 : 0;
  }
  return cut;
}

double nudge_level(std::span<const double> heights, double level) {
  // Heights within kSame of the level count as lying on it.
  constexpr double kSame = 1e-9;
  double lowest_on = level;
  bool collides = false;
  for (double h : heights) {
    if (std::fabs(h - level) <= kSame) {
      collides = true;
      lowest_on = std::min(lowest_on, h);
    }
  }
  if (!collides) return level;
  double below = 0.0;
  for (double h : heights) {
    if (h < level - kSame) below = std::max(below, h);
  }
  return lowest_on - std::min(1e-9, 0.5 * (lowest_on - below));
}

template struct LevelCut<double>;
template struct LevelCut<Rational>;
template LevelCut<double> cut_at_level<double>(const PlanarGraph&, std::span<const double>,
                                               const double&);
template LevelCut<Rational> cut_at_level<Rational>(const PlanarGraph&, std::span<const Rational>,
                                                   const Rational&);

}  // namespace tiler
