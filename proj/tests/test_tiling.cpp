#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tiler/generators.hpp"
#include "tiler/svg.hpp"
#include "tiler/tiling.hpp"

using namespace tiler;

namespace {

int tree_depth(const PlanarGraph& g, VertexId v) { return static_cast<int>(g.label(v).size()) - 1; }

double circular_distance(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

}  // namespace

TEST_CASE("path tiling is two full-width bands") {
  const auto t = tile_killed<Rational>(path_graph());
  CHECK(t.face_width.size() == 1);
  CHECK(t.face_width[0] == 0);
  for (const auto& r : t.rects) {
    CHECK(r.width == 1);
    CHECK(r.h_high - r.h_low == Rational(1, 2));
    CHECK(r.w_start == 0);
  }
  CHECK(t.profile.conductance[0] == 2);
  CHECK(audit_tiling(t).passed());
}

TEST_CASE("binary tree edges become dyadic squares split in halves") {
  const PlanarGraph g = binary_tree(8, TreeTail::kGround);
  const auto t = tile_killed<Rational>(g);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edge(e);
    const auto& r = t.rects[e];
    if (g.is_sink(edge.v)) {
      CHECK(r.h_low == 0);
      continue;
    }
    const int d = tree_depth(g, edge.u);
    CHECK(r.width == Rational(1, 2u << d));
    CHECK(r.h_high == Rational(1, 1u << d));
    CHECK(r.h_low == Rational(1, 2u << d));
  }
  // Children split their parent's interval into adjacent halves.
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (g.is_sink(v) || g.degree(v) < 3 - (v == g.root() ? 1 : 0)) continue;
    const auto& parent = t.intervals[v];
    const auto c0 = g.find_vertex(g.label(v) + "0");
    const auto c1 = g.find_vertex(g.label(v) + "1");
    if (!c0 || !c1) continue;
    const auto& i0 = t.intervals[*c0];
    const auto& i1 = t.intervals[*c1];
    CHECK(i0.width == parent.width / 2);
    CHECK(i1.width == parent.width / 2);
    CHECK(wrap_unit<Rational>(Rational(i0.w_start + i0.width - i1.w_start)) * wrap_unit<Rational>(Rational(i1.w_start + i1.width - i0.w_start)) == 0);
  }
  const TilingAudit a = audit_tiling(t);
  CHECK(a.passed());
  CHECK(a.squares == g.num_edges());
}

TEST_CASE("the first child takes the upper half of the circle") {
  const PlanarGraph g = binary_tree(2, TreeTail::kGround);
  const auto t = tile_killed<Rational>(g);
  CHECK(t.intervals[*g.find_vertex("o0")].w_start == Rational(1, 2));
  CHECK(t.intervals[*g.find_vertex("o1")].w_start == 0);
}

TEST_CASE("chord cycle tiles exactly with consistent dual cycles") {
  const PlanarGraph g = chord_cycle();
  const auto t = tile_killed<Rational>(g);
  CHECK(t.profile.h[*g.find_vertex("b")] == Rational(1, 3));
  CHECK(t.profile.scale == Rational(3, 8));
  CHECK(t.max_cycle_defect == 0.0);
  const TilingAudit a = audit_tiling(t);
  CHECK(a.passed());
  CHECK(a.total_area == 1.0);
  const auto td = tile_killed<double>(g);
  CHECK(td.max_cycle_defect < 1e-9);
  CHECK(audit_tiling(td).passed());
}

TEST_CASE("dual darts of a face boundary form a directed cut") {
  const PlanarGraph g = hyperbolic_tessellation(4, 5, 2);
  const TilingEmbedding te = tiling_embedding(g);
  for (int f = 0; f < te.faces.count(); ++f) {
    for (DartId d : te.faces.cycles[f]) CHECK(te.dual.tail(d) == f);
  }
}

TEST_CASE("float audits pass at 1e-7 on generated families") {
  for (const PlanarGraph& g : {binary_tree(12), perturbed_tree(10, 3), hyperbolic_tessellation(4, 5, 4),
                               hyperbolic_tessellation(3, 7, 4), hyperbolic_tessellation(7, 3, 4), grid_box(12)}) {
    const auto t = tile_killed<double>(g);
    const TilingAudit a = audit_tiling(t);
    CHECK(a.passed());
    CHECK(a.total_area == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::fabs(a.total_area - a.energy) < 1e-9);
  }
}

TEST_CASE("exact audits pass on the rational pipeline") {
  for (const PlanarGraph& g : {binary_tree(6), perturbed_tree(6, 9), hyperbolic_tessellation(4, 5, 2),
                               hyperbolic_tessellation(7, 3, 2), grid_box(4)}) {
    const TilingAudit a = audit_tiling(tile_killed<Rational>(g));
    CHECK(a.passed());
    CHECK(a.total_area == 1.0);
    CHECK(a.max_overlap == 0.0);
    CHECK(a.max_aspect_deviation == 0.0);
  }
}

TEST_CASE("widths do not depend on the dual spanning tree") {
  for (const PlanarGraph& g : {hyperbolic_tessellation(4, 5, 3), grid_box(6), chord_cycle()}) {
    const auto p = normalize_flow(killed_profile<double>(g));
    const TilingEmbedding te = tiling_embedding(g);
    const auto base = assign_dual_widths<double>(te, p);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      WidthOptions opts;
      opts.tree_seed = seed;
      opts.zeta = static_cast<int>(seed * 7 % te.faces.count());
      const auto w = assign_dual_widths<double>(te, p, opts);
      const double shift = w.width[base.zeta];
      for (int f = 0; f < te.faces.count(); ++f) {
        const double rotated = std::fmod(base.width[f] + shift, 1.0);
        CHECK(circular_distance(rotated, w.width[f]) < 1e-9);
      }
    }
  }
}

TEST_CASE("rectangles touch the intervals of both endpoints") {
  const auto t = tile_killed<double>(hyperbolic_tessellation(5, 4, 3));
  CHECK(audit_tiling(t).tangency_failures == 0);
}

TEST_CASE("a corrupted width is caught by the sweep") {
  auto t = tile_killed<double>(binary_tree(6));
  t.rects[5].width += 1e-3;
  const TilingAudit a = audit_tiling(t);
  CHECK_FALSE(a.passed());
  CHECK((!a.overlap_ok || !a.coverage_ok));
}

TEST_CASE("subdividing an edge splits only its rectangle") {
  const PlanarGraph g = hyperbolic_tessellation(4, 5, 2);
  const auto before = tile_killed<Rational>(g);
  const EdgeId e = 7;
  const PlanarGraph s = subdivide_edge(g, e, Rational(2, 5));
  const auto after = tile_killed<Rational>(s);
  for (EdgeId k = 0; k < g.num_edges(); ++k) {
    if (k == e) continue;
    const auto& a = before.rects[k];
    const auto& b = after.rects[k];
    CHECK(a.w_start == b.w_start);
    CHECK(a.width == b.width);
    CHECK(a.h_low == b.h_low);
    CHECK(a.h_high == b.h_high);
  }
  const auto& whole = before.rects[e];
  const auto& upper = after.rects[e];
  const auto& lower = after.rects[g.num_edges()];
  CHECK(upper.w_start == whole.w_start);
  CHECK(lower.w_start == whole.w_start);
  CHECK(upper.width == whole.width);
  CHECK(lower.width == whole.width);
  CHECK(std::max(upper.h_high, lower.h_high) == whole.h_high);
  CHECK(std::min(upper.h_low, lower.h_low) == whole.h_low);
  CHECK(std::min(upper.h_high, lower.h_high) == std::max(upper.h_low, lower.h_low));
}

TEST_CASE("killing at a level stretches the deeper tiling affinely") {
  const PlanarGraph g = binary_tree(10, TreeTail::kGround);
  const auto deep = tile_killed<Rational>(g);
  const Rational level(3, 16);
  const auto lt = tile_level<Rational>(g, deep.profile.h, level);
  const auto& up = lt.upper;
  CHECK(audit_tiling(lt.tiling).passed());
  for (EdgeId e = 0; e < up.graph.num_edges(); ++e) {
    const EdgeId parent = up.edge_to_parent[e];
    const auto& r = lt.tiling.rects[e];
    if (parent >= g.num_edges()) continue;  // a half of a cut edge
    const VertexId x = lt.cut.graph.edge(parent).u;
    const VertexId y = lt.cut.graph.edge(parent).v;
    if (x >= g.num_vertices() || y >= g.num_vertices()) continue;
    const auto& d = deep.rects[parent];
    CHECK(r.width == d.width);
    CHECK(r.w_start == d.w_start);
    CHECK(r.h_high == (d.h_high - level) / (1 - level));
    CHECK(r.h_low == (d.h_low - level) / (1 - level));
  }
  // Same statement with the frontier of a shallower tree as the level set.
  const PlanarGraph shallow = binary_tree(4);
  const auto ts = tile_killed<Rational>(shallow);
  const Rational l(1, 16);
  for (EdgeId e = 0; e < shallow.num_edges(); ++e) {
    const auto& r = ts.rects[e];
    const auto& d = deep.rects[e];
    CHECK(r.width == d.width);
    CHECK(r.h_high == (d.h_high - l) / (1 - l));
  }
}

TEST_CASE("SVG output is deterministic and draws every rectangle") {
  const auto t = tile_killed<double>(binary_tree(6));
  const std::string a = render_svg(t);
  CHECK(a == render_svg(tile_killed<double>(binary_tree(6))));
  std::size_t count = 0;
  for (std::size_t pos = a.find("<rect"); pos != std::string::npos; pos = a.find("<rect", pos + 1)) ++count;
  CHECK(count == t.rects.size() + 1);
  Tiling<double> empty;
  const std::string frame = render_svg(empty);
  CHECK(frame.find("<rect x=\"0\" y=\"0\"") != std::string::npos);
  CHECK(frame.find("fill=\"#") == std::string::npos);
}
