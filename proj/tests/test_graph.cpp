#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>

#include "tiler/generators.hpp"
#include "tiler/graph.hpp"
#include "tiler/graph_io.hpp"

using namespace tiler;

namespace {

std::vector<int> sorted_face_lengths(const Faces& f) {
  std::vector<int> len;
  for (const auto& c : f.cycles) len.push_back(static_cast<int>(c.size()));
  std::sort(len.begin(), len.end());
  return len;
}

PlanarGraph triangle() {
  GraphBuilder b;
  auto x = b.add_vertex("x"), y = b.add_vertex("y"), z = b.add_vertex("z");
  b.add_edge(x, y, 1.0);
  b.add_edge(y, z, 1.0);
  b.add_edge(z, x, 1.0);
  b.set_root(x);
  b.add_sink(z);
  return std::move(b).build();
}

}  // namespace

TEST_CASE("path graph has one face traced through all four darts") {
  const PlanarGraph g = path_graph();
  CHECK(g.num_vertices() == 3);
  CHECK(g.num_edges() == 2);
  const Faces f = trace_faces(g);
  CHECK(f.count() == 1);
  CHECK(f.cycles[0].size() == 4);
  CHECK(euler_characteristic(g.embedding(), f) == 2);
}

TEST_CASE("binary tree of depth 10 has 2047 vertices and 2046 edges") {
  const PlanarGraph g = binary_tree(10);
  CHECK(g.num_vertices() == 2047);
  CHECK(g.num_edges() == 2046);
  CHECK(g.sinks().size() == 1024);
  CHECK(trace_faces(g).count() == 1);
  CHECK(g.label(g.root()) == "o");
  CHECK(g.find_vertex("o0110").has_value());
}

TEST_CASE("triangle has two faces of length three and a dual with three parallel edges") {
  const PlanarGraph g = triangle();
  const Faces f = trace_faces(g);
  CHECK(sorted_face_lengths(f) == std::vector<int>{3, 3});
  const DualGraph d = build_dual(g);
  CHECK(d.num_vertices == 2);
  for (EdgeId e = 0; e < g.num_edges(); ++e) CHECK(d.tail(forward_dart(e)) != d.head(forward_dart(e)));
}

TEST_CASE("tree dual is a single vertex carrying one loop per edge") {
  const PlanarGraph g = binary_tree(3);
  const DualGraph d = build_dual(g);
  CHECK(d.num_vertices == 1);
  for (DartId x = 0; x < g.num_darts(); ++x) CHECK(d.tail(x) == d.head(x));
}

TEST_CASE("chord cycle faces and dual degrees match a hand trace") {
  const PlanarGraph g = chord_cycle();
  const Faces f = trace_faces(g);
  CHECK(sorted_face_lengths(f) == std::vector<int>{3, 3, 4});
  CHECK(euler_characteristic(g.embedding(), f) == 2);
  const DualGraph d = build_dual(g);
  CHECK(d.num_vertices == 3);
  auto deg = d.degrees();
  std::sort(deg.begin(), deg.end());
  CHECK(deg == std::vector<int>{3, 3, 4});
  // Hand trace: the darts o->a, a->b, b->o bound the lower-right triangle.
  const DartId oa = forward_dart(*g.find_edge("oa"));
  const DartId ab = forward_dart(*g.find_edge("ab"));
  const DartId bo = backward_dart(*g.find_edge("ob"));
  CHECK(f.face_of[oa] == f.face_of[ab]);
  CHECK(f.face_of[ab] == f.face_of[bo]);
  CHECK(f.cycles[f.face_of[oa]].size() == 3);
}

TEST_CASE("dual of the dual maps each dart to its reverse") {
  for (const PlanarGraph& g : {chord_cycle(), triangle(), hyperbolic_tessellation(4, 5, 2)}) {
    const Faces f = trace_faces(g);
    const DualGraph d = build_dual(g);
    const Embedding de = dual_embedding(d, f);
    const Faces ff = trace_faces(de);
    CHECK(ff.count() == g.num_vertices());
    CHECK(euler_characteristic(de, ff) == 2);
    // Faces of the dual are the primal vertices, and the dual of dual dart x
    // leaves the face standing for head(x): duality applied twice reverses x.
    std::map<int, int> face_to_vertex;
    for (DartId x = 0; x < g.num_darts(); ++x) {
      const int face = ff.face_of[x];
      auto [it, fresh] = face_to_vertex.emplace(face, g.head(x));
      if (!fresh) CHECK(it->second == g.head(x));
    }
  }
}

TEST_CASE("Euler's formula holds on generated families") {
  for (const PlanarGraph& g : {binary_tree(5), hyperbolic_tessellation(4, 5, 3), hyperbolic_tessellation(5, 4, 2),
                               hyperbolic_tessellation(3, 7, 3), hyperbolic_tessellation(7, 3, 3), grid_box(4)}) {
    CHECK(euler_characteristic(g.embedding(), trace_faces(g)) == 2);
  }
}

TEST_CASE("hyperbolic tessellation has p-gon inner faces and degree q inside") {
  for (auto [p, q] : {std::pair{4, 5}, {5, 4}, {3, 7}, {7, 3}, {6, 4}}) {
    const PlanarGraph g = hyperbolic_tessellation(p, q, 3);
    const Faces f = trace_faces(g);
    int outer = 0;
    for (const auto& c : f.cycles) {
      if (static_cast<int>(c.size()) != p) ++outer;
    }
    CHECK(outer == 1);
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
      if (!g.is_sink(v)) CHECK(g.degree(v) == q);
    }
    // Nested: the smaller truncation's labels survive with the same edges.
    const PlanarGraph h = hyperbolic_tessellation(p, q, 2);
    for (EdgeId e = 0; e < h.num_edges(); ++e) {
      const auto u = g.find_vertex(h.label(h.edge(e).u));
      REQUIRE(u.has_value());
    }
  }
}

TEST_CASE("builder rejects malformed input with a named field") {
  SUBCASE("nonpositive conductance") {
    GraphBuilder b;
    auto x = b.add_vertex("x"), y = b.add_vertex("y");
    b.add_edge(x, y, 0.0);
    b.set_root(x);
    CHECK_THROWS_WITH_AS(std::move(b).build(), doctest::Contains("conductance"), InputError);
  }
  SUBCASE("duplicate edge id") {
    GraphBuilder b;
    auto x = b.add_vertex("x"), y = b.add_vertex("y");
    b.add_edge(x, y, 1.0, "e");
    b.add_edge(x, y, 1.0, "e");
    b.set_root(x);
    CHECK_THROWS_WITH_AS(std::move(b).build(), doctest::Contains("duplicate edge id"), InputError);
  }
  SUBCASE("rotation with a foreign dart") {
    GraphBuilder b;
    auto x = b.add_vertex("x"), y = b.add_vertex("y"), z = b.add_vertex("z");
    b.add_edge(x, y, 1.0);
    const EdgeId e = b.add_edge(y, z, 1.0);
    b.set_rotation(x, {forward_dart(e)});
    b.set_root(x);
    CHECK_THROWS_AS(std::move(b).build(), InputError);
  }
  SUBCASE("disconnected") {
    GraphBuilder b;
    auto x = b.add_vertex("x"), y = b.add_vertex("y");
    b.add_vertex("lonely");
    b.add_edge(x, y, 1.0);
    b.set_root(x);
    CHECK_THROWS_WITH_AS(std::move(b).build(), doctest::Contains("lonely"), InputError);
  }
}

TEST_CASE("subdividing splits resistance proportionally") {
  GraphBuilder b;
  auto x = b.add_vertex("x"), y = b.add_vertex("y");
  b.add_edge(x, y, 2.0, "e");
  b.set_root(x);
  b.add_sink(y);
  const PlanarGraph g = std::move(b).build();
  const PlanarGraph s = subdivide_edge(g, 0, Rational(1, 4));
  CHECK(s.num_vertices() == 3);
  CHECK(s.exact_conductance(0) == 8);
  CHECK(s.exact_conductance(1) == Rational(8, 3));
  CHECK(s.vertex_origin(2)->t == doctest::Approx(0.25));
  CHECK(euler_characteristic(s.embedding(), trace_faces(s)) == 2);

  const PlanarGraph unit = subdivide_edge(path_graph(), 0, 0.5);
  CHECK(unit.exact_conductance(0) == 2);
  CHECK(unit.exact_conductance(unit.num_edges() - 1) == 2);
  CHECK_THROWS_AS(subdivide_edge(g, 0, 1.0), InputError);
  CHECK_THROWS_AS(subdivide_edge(g, 0, 0.0), InputError);
}

TEST_CASE("subdivision keeps faces and the rotation elsewhere") {
  const PlanarGraph g = chord_cycle();
  const PlanarGraph s = subdivide_edge(g, *g.find_edge("ob"), Rational(1, 3));
  const Faces f = trace_faces(s);
  CHECK(sorted_face_lengths(f) == std::vector<int>{4, 4, 4});
  CHECK(euler_characteristic(s.embedding(), f) == 2);
  for (VertexId v : {0, 1, 3}) {
    auto r0 = g.rotation(v);
    auto r1 = s.rotation(v);
    CHECK(std::equal(r0.begin(), r0.end(), r1.begin(), r1.end()));
  }
}

TEST_CASE("level cut on the binary tree at 3/8 inserts four dummies") {
  const PlanarGraph g = binary_tree(4);
  std::vector<Rational> h(g.num_vertices());
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    const int depth = static_cast<int>(g.label(v).size()) - 1;
    h[v] = Rational(1, 1u << depth);
  }
  const LevelCut<Rational> cut = cut_at_level<Rational>(g, h, Rational(3, 8));
  CHECK(cut.boundary.size() == 4);
  for (VertexId b : cut.boundary) CHECK(cut.heights[b] == Rational(3, 8));
  for (std::size_t i = 0; i < cut.boundary.size(); ++i) CHECK(cut.cut_parameter[i] == Rational(1, 2));
  const InducedSubgraph up = cut.upper();
  CHECK(up.graph.num_vertices() == 3 + 4);
  CHECK(up.graph.sinks().size() == 4);
  for (VertexId v = 0; v < cut.graph.num_vertices(); ++v) {
    CHECK((cut.upper_mask[v] || cut.lower_mask[v]));
    if (cut.upper_mask[v] && cut.lower_mask[v]) CHECK(cut.heights[v] == Rational(3, 8));
  }
}

TEST_CASE("level cut near the top keeps only the root and stubs") {
  const PlanarGraph g = binary_tree(3);
  std::vector<double> h(g.num_vertices());
  for (VertexId v = 0; v < g.num_vertices(); ++v) h[v] = std::ldexp(1.0, -(static_cast<int>(g.label(v).size()) - 1));
  const LevelCut<double> cut = cut_at_level<double>(g, h, 0.999);
  const InducedSubgraph up = cut.upper();
  CHECK(up.graph.num_vertices() == 3);
  CHECK(up.graph.num_edges() == 2);
}

TEST_CASE("level cut on the path lands mid-edge") {
  const PlanarGraph g = path_graph();
  const std::vector<Rational> h{1, Rational(1, 2), 0};
  const LevelCut<Rational> cut = cut_at_level<Rational>(g, h, Rational(1, 4));
  REQUIRE(cut.boundary.size() == 1);
  CHECK(cut.cut_edge[0] == *g.find_edge("at"));
  CHECK(cut.cut_parameter[0] == Rational(1, 2));
  CHECK_THROWS_WITH_AS(cut_at_level<Rational>(g, h, Rational(1, 2)), doctest::Contains("nudge"), InputError);
  CHECK_THROWS_AS(cut_at_level<Rational>(g, h, Rational(1)), InputError);
  const std::vector<double> hd{1.0, 0.5, 0.0};
  const double l = nudge_level(hd, 0.5);
  CHECK(l < 0.5);
  CHECK(l > 0.49);
  CHECK_NOTHROW(cut_at_level<double>(g, hd, l));
}

TEST_CASE("graph JSON round-trips and names bad fields") {
  const PlanarGraph g = subdivide_edge(chord_cycle(), 4, Rational(1, 3));
  const Json doc = graph_to_json(g);
  const PlanarGraph back = graph_from_json(doc);
  CHECK(graph_to_json(back).dump() == doc.dump());
  CHECK(back.exact_conductance(4) == g.exact_conductance(4));

  Json bad = doc;
  bad["edges"][1]["conductance"] = -1.0;
  CHECK_THROWS_WITH_AS(graph_from_json(bad), doctest::Contains("edges[1].conductance"), InputError);
  Json wrong_schema = doc;
  wrong_schema["schema"] = "tiler-graph/2";
  CHECK_THROWS_WITH_AS(graph_from_json(wrong_schema), doctest::Contains("schema"), InputError);
  Json no_root = doc;
  no_root.erase("root");
  CHECK_THROWS_WITH_AS(graph_from_json(no_root), doctest::Contains("root"), InputError);
}

TEST_CASE("graph JSON accepts integer vertex ids and omitted rotations") {
  const Json doc = Json::parse(R"({
    "vertices": [0, 1, 2],
    "edges": [{"id": "a", "u": 0, "v": 1, "conductance": 1}, {"id": "b", "u": 1, "v": 2, "conductance": 3}],
    "root": 0,
    "sinks": [2]
  })");
  const PlanarGraph g = graph_from_json(doc);
  CHECK(g.num_vertices() == 3);
  CHECK(g.edge(1).conductance == 3.0);
}

TEST_CASE("unreduced rational parameters give the same graph as reduced ones") {
  const PlanarGraph g = chord_cycle();
  Rational half(2, 4);
  const PlanarGraph a = subdivide_edge(g, 1, half);
  const PlanarGraph b = subdivide_edge(g, 1, Rational(1, 2));
  for (EdgeId e = 0; e < a.num_edges(); ++e) CHECK(a.exact_conductance(e) == b.exact_conductance(e));
  GraphBuilder builder;
  const VertexId o = builder.add_vertex("o");
  const VertexId x = builder.add_vertex("x");
  builder.set_root(o);
  builder.add_sink(x);
  builder.add_edge_exact(o, x, Rational(6, 4));
  CHECK(std::move(builder).build().exact_conductance(0) == Rational(3, 2));
}
