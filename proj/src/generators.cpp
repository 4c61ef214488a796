#include "tiler/generators.hpp"

#include <array>
#include <cstdlib>
#include <map>

#include "tiler/rng.hpp"

namespace tiler {

namespace {

// Breadth-first b-ary tree. Children of vertex v are created in index order, so
// vertex ids coincide with heap order and stay fixed as the depth grows.
PlanarGraph build_tree(int branching, int depth, TreeTail tail,
                       const std::function<double(int child)>& conductance) {
  if (branching < 2) throw InputError("branching: must be at least 2");
  if (depth < 1) throw InputError("depth: must be at least 1");
  GraphBuilder b;
  std::vector<std::string> labels{"o"};
  std::vector<VertexId> level{b.add_vertex("o")};
  std::vector<std::vector<DartId>> rotation(1);
  for (int d = 1; d <= depth; ++d) {
    std::vector<VertexId> next;
    for (VertexId v : level) {
      for (int k = 0; k < branching; ++k) {
        labels.push_back(labels[v] + std::to_string(k));
        const VertexId c = b.add_vertex(labels.back());
        const EdgeId e = b.add_edge(v, c, conductance(c));
        rotation.push_back({backward_dart(e)});
        rotation[v].push_back(forward_dart(e));
        next.push_back(c);
      }
    }
    level = std::move(next);
  }
  if (tail == TreeTail::kGround) {
    for (VertexId v : level) {
      const VertexId s = b.add_vertex(labels[v] + "*");
      const EdgeId e = b.add_edge(v, s, conductance(v) * (branching - 1));
      rotation[v].push_back(forward_dart(e));
      rotation.push_back({backward_dart(e)});
      b.add_sink(s);
    }
  } else {
    for (VertexId v : level) b.add_sink(v);
  }
  for (VertexId v = 0; v < static_cast<VertexId>(rotation.size()); ++v) {
    b.set_rotation(v, rotation[v]);
  }
  b.set_root(0);
  return std::move(b).build();
}

}  // namespace

PlanarGraph bary_tree(int branching, int depth, TreeTail tail, double conductance) {
  if (!(conductance > 0.0)) throw InputError("conductance: must be positive");
  return build_tree(branching, depth, tail, [&](int) { return conductance; });
}

PlanarGraph perturbed_tree(int depth, std::uint64_t seed, double low, double high) {
  if (!(low > 0.0 && high >= low)) throw InputError("perturbation range must satisfy 0 < low <= high");
  auto draw = [&](int child) {
    CounterRng rng(seed, static_cast<std::uint64_t>(child));
    return low + (high - low) * rng.uniform();
  };
  return build_tree(2, depth, TreeTail::kKilled, draw);
}

// ---------------------------------------------------------------------------

namespace {

// Assembles a planar graph from counterclockwise face cycles (each face on the
// left of its traversal). Around v, a corner u -> v -> w places u right after w.
PlanarGraph graph_from_faces(int num_vertices, const std::vector<std::vector<int>>& faces,
                             const std::vector<std::string>& labels, VertexId root,
                             const std::vector<VertexId>& sinks) {
  GraphBuilder b;
  for (int v = 0; v < num_vertices; ++v) b.add_vertex(labels[v]);
  std::map<std::pair<int, int>, EdgeId> edge_of_pair;
  std::vector<std::map<int, int>> next_ccw(num_vertices);
  auto dart = [&](int x, int y) {
    auto it = edge_of_pair.find({std::min(x, y), std::max(x, y)});
    EdgeId e;
    if (it == edge_of_pair.end()) {
      e = b.add_edge(std::min(x, y), std::max(x, y), 1.0);
      edge_of_pair.emplace(std::pair{std::min(x, y), std::max(x, y)}, e);
    } else {
      e = it->second;
    }
    return x < y ? forward_dart(e) : backward_dart(e);
  };
  for (const auto& face : faces) {
    const int r = static_cast<int>(face.size());
    for (int i = 0; i < r; ++i) {
      const int u = face[(i - 1 + r) % r];
      const int v = face[i];
      const int w = face[(i + 1) % r];
      if (!next_ccw[v].emplace(w, u).second) throw InputError("hyperbolic: inconsistent face system");
    }
  }
  for (int v = 0; v < num_vertices; ++v) {
    if (next_ccw[v].empty()) continue;
    std::vector<DartId> rot;
    const int start = next_ccw[v].begin()->first;
    int x = start;
    do {
      rot.push_back(dart(v, x));
      auto it = next_ccw[v].find(x);
      if (it == next_ccw[v].end()) throw InputError("hyperbolic: open vertex star");
      x = it->second;
    } while (x != start && rot.size() <= next_ccw[v].size());
    if (rot.size() != next_ccw[v].size()) throw InputError("hyperbolic: vertex star is not a single cycle");
    b.set_rotation(v, std::move(rot));
  }
  b.set_root(root);
  for (VertexId s : sinks) b.add_sink(s);
  return std::move(b).build();
}

}  // namespace

PlanarGraph hyperbolic_tessellation(int p, int q, int layers) {
  if (p < 3 || q < 3 || p * q <= 2 * (p + q)) {
    throw InputError("hyperbolic: {p,q} must satisfy 1/p + 1/q < 1/2");
  }
  if (layers < 1) throw InputError("depth: must be at least 1");
  int n = 1;
  std::vector<int> faces_at{0};
  std::vector<std::vector<int>> faces;
  std::vector<int> boundary{0};  // counterclockwise around the root

  for (int layer = 0; layer < layers; ++layer) {
    const int L = static_cast<int>(boundary.size());
    // Spokes leave the ring between its neighbours on the outer side; a vertex
    // still missing m faces sends out m - 1 of them (the lone root sends m).
    std::vector<int> spoke_at;
    for (int i = 0; i < L; ++i) {
      const int missing = q - faces_at[boundary[i]];
      if (missing < 1) throw InputError("hyperbolic: ring vertex already saturated");
      const int spokes = L == 1 ? missing : missing - 1;
      for (int k = 0; k < spokes; ++k) spoke_at.push_back(i);
    }
    const int S = static_cast<int>(spoke_at.size());
    if (S == 0) throw InputError("hyperbolic: construction closed up");

    if (L > 1 && spoke_at.front() == spoke_at.back()) {
      throw InputError("hyperbolic: ring too sparse for {p,q}");
    }
    std::vector<int> span(S);
    std::vector<int> fresh(S);
    for (int t = 0; t < S; ++t) {
      span[t] = (spoke_at[(t + 1) % S] - spoke_at[t] + L) % L;
      fresh[t] = p - (span[t] + 1) - 2;
      if (fresh[t] < -1) throw InputError("hyperbolic: ring too sparse for {p,q}");
    }
    // Spoke endpoints; a slot with fresh == -1 closes with both spokes meeting.
    std::vector<int> endpoint(S, -1);
    int first_free = -1;
    for (int t = 0; t < S; ++t) {
      if (fresh[(t - 1 + S) % S] != -1) {
        first_free = t;
        break;
      }
    }
    if (first_free < 0) throw InputError("hyperbolic: every spoke merges");
    for (int k = 0; k < S; ++k) {
      const int t = (first_free + k) % S;
      const int prev = (t - 1 + S) % S;
      if (fresh[prev] == -1 && k > 0) {
        endpoint[t] = endpoint[prev];
      } else {
        endpoint[t] = n++;
        faces_at.push_back(0);
      }
    }

    std::vector<int> next_boundary;
    for (int k = 0; k < S; ++k) {
      const int t = (first_free + k) % S;
      std::vector<int> face;
      const int i = spoke_at[t];
      for (int s = span[t]; s >= 0; --s) face.push_back(boundary[(i + s) % L]);
      face.push_back(endpoint[t]);
      if (next_boundary.empty() || next_boundary.back() != endpoint[t]) next_boundary.push_back(endpoint[t]);
      for (int f = 0; f < fresh[t]; ++f) {
        face.push_back(n);
        next_boundary.push_back(n);
        faces_at.push_back(0);
        ++n;
      }
      if (fresh[t] >= 0) face.push_back(endpoint[(t + 1) % S]);
      for (int v : face) ++faces_at[v];
      faces.push_back(std::move(face));
    }
    if (next_boundary.size() > 1 && next_boundary.front() == next_boundary.back()) next_boundary.pop_back();
    boundary = std::move(next_boundary);
  }

  std::vector<int> outer(boundary.rbegin(), boundary.rend());
  faces.push_back(outer);
  std::vector<std::string> labels(n);
  labels[0] = "o";
  for (int v = 1; v < n; ++v) labels[v] = "h" + std::to_string(v);
  return graph_from_faces(n, faces, labels, 0, boundary);
}

PlanarGraph grid_box(int radius) {
  if (radius < 1) throw InputError("depth: grid radius must be at least 1");
  GraphBuilder b;
  const int side = 2 * radius + 1;
  auto on_boundary = [&](int x, int y) { return std::abs(x) == radius || std::abs(y) == radius; };
  auto corner = [&](int x, int y) { return std::abs(x) == radius && std::abs(y) == radius; };
  std::vector<VertexId> id(side * side, kNoVertex);
  auto at = [&](int x, int y) -> VertexId& { return id[(y + radius) * side + (x + radius)]; };
  // Root first so it gets index 0.
  at(0, 0) = b.add_vertex("o");
  for (int y = -radius; y <= radius; ++y) {
    for (int x = -radius; x <= radius; ++x) {
      if ((x == 0 && y == 0) || corner(x, y)) continue;
      at(x, y) = b.add_vertex(std::to_string(x) + "," + std::to_string(y));
    }
  }
  std::vector<std::array<EdgeId, 4>> incident(b.num_vertices(), {-1, -1, -1, -1});
  std::vector<std::array<DartId, 4>> darts(b.num_vertices(), {-1, -1, -1, -1});
  auto connect = [&](int x0, int y0, int x1, int y1, int dir) {
    if (corner(x0, y0) || corner(x1, y1)) return;
    if (on_boundary(x0, y0) && on_boundary(x1, y1)) return;
    const VertexId u = at(x0, y0);
    const VertexId v = at(x1, y1);
    const EdgeId e = b.add_edge(u, v, 1.0);
    darts[u][dir] = forward_dart(e);
    darts[v][(dir + 2) % 4] = backward_dart(e);
  };
  for (int y = -radius; y <= radius; ++y) {
    for (int x = -radius; x <= radius; ++x) {
      if (x < radius) connect(x, y, x + 1, y, 0);
      if (y < radius) connect(x, y, x, y + 1, 1);
    }
  }
  for (VertexId v = 0; v < b.num_vertices(); ++v) {
    std::vector<DartId> rot;
    for (DartId d : darts[v]) {
      if (d >= 0) rot.push_back(d);
    }
    b.set_rotation(v, std::move(rot));
  }
  b.set_root(at(0, 0));
  for (int y = -radius; y <= radius; ++y) {
    for (int x = -radius; x <= radius; ++x) {
      if (on_boundary(x, y) && !corner(x, y)) b.add_sink(at(x, y));
    }
  }
  return std::move(b).build();
}

PlanarGraph path_graph() {
  GraphBuilder b;
  const VertexId o = b.add_vertex("o");
  const VertexId a = b.add_vertex("a");
  const VertexId t = b.add_vertex("t");
  b.add_edge(o, a, 1.0, "oa");
  b.add_edge(a, t, 1.0, "at");
  b.set_root(o);
  b.add_sink(t);
  return std::move(b).build();
}

PlanarGraph chord_cycle() {
  GraphBuilder b;
  const VertexId o = b.add_vertex("o");
  const VertexId a = b.add_vertex("a");
  const VertexId bb = b.add_vertex("b");
  const VertexId c = b.add_vertex("c");
  const EdgeId oa = b.add_edge(o, a, 1.0, "oa");
  const EdgeId ab = b.add_edge(a, bb, 1.0, "ab");
  const EdgeId bc = b.add_edge(bb, c, 1.0, "bc");
  const EdgeId co = b.add_edge(c, o, 1.0, "co");
  const EdgeId ob = b.add_edge(o, bb, 1.0, "ob");
  // Positions o(0,0), a(1,0), b(1,1), c(0,1); rotations counterclockwise.
  b.set_rotation(o, {forward_dart(oa), forward_dart(ob), backward_dart(co)});
  b.set_rotation(a, {forward_dart(ab), backward_dart(oa)});
  b.set_rotation(bb, {forward_dart(bc), backward_dart(ob), backward_dart(ab)});
  b.set_rotation(c, {forward_dart(co), backward_dart(bc)});
  b.set_root(o);
  b.add_sink(a);
  b.add_sink(c);
  return std::move(b).build();
}

// ---------------------------------------------------------------------------

GraphFamily make_family(const FamilySpec& spec) {
  const TreeTail tail = spec.ground_tail ? TreeTail::kGround : TreeTail::kKilled;
  if (spec.name == "binary-tree") return [tail](int d) { return bary_tree(2, d, tail); };
  if (spec.name == "bary-tree") {
    const int k = spec.branching;
    return [k, tail](int d) { return bary_tree(k, d, tail); };
  }
  if (spec.name == "perturbed-tree") {
    const std::uint64_t seed = spec.perturb_seed;
    return [seed](int d) { return perturbed_tree(d, seed); };
  }
  if (spec.name == "hyperbolic") {
    const int p = spec.p;
    const int q = spec.q;
    return [p, q](int d) { return hyperbolic_tessellation(p, q, d); };
  }
  if (spec.name == "grid") return [](int d) { return grid_box(d); };
  throw InputError("family: unknown family '" + spec.name +
                   "' (expected binary-tree, bary-tree, perturbed-tree, hyperbolic or grid)");
}

PlanarGraph build_family(const FamilySpec& spec) { return make_family(spec)(spec.depth); }

}  // namespace tiler
