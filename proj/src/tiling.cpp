#include "tiler/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tiler/rng.hpp"

namespace tiler {

TilingEmbedding tiling_embedding(const PlanarGraph& g) {
  TilingEmbedding te;
  const Embedding& base = g.embedding();
  const Faces base_faces = trace_faces(base);
  if (euler_characteristic(base, base_faces) != 2) {
    throw InputError("rotation: the rotation system is not planar (V - E + F != 2)");
  }
  const auto sinks = g.sinks();
  if (sinks.size() <= 1) {
    te.embedding = base;
    te.faces = base_faces;
    te.merged_sink = sinks.empty() ? kNoVertex : sinks.front();
    te.dual = build_dual(te.embedding, te.faces, g.root());
    return te;
  }

  // First face whose boundary visits every sink.
  int host = -1;
  for (int f = 0; f < base_faces.count() && host < 0; ++f) {
    std::vector<char> seen(g.num_vertices(), 0);
    std::size_t found = 0;
    for (DartId d : base_faces.cycles[f]) {
      const VertexId v = base.tail[d];
      if (g.is_sink(v) && !seen[v]) {
        seen[v] = 1;
        ++found;
      }
    }
    if (found == sinks.size()) host = f;
  }
  if (host < 0) throw SolverError("sinks not on a common face: cannot merge them for the tiling");

  const int n = g.num_vertices();
  Embedding emb;
  emb.num_vertices = n + 1;
  emb.tail = base.tail;
  emb.rotation = base.rotation;
  std::vector<DartId> merged;
  std::vector<char> used(n, 0);
  const auto& cycle = base_faces.cycles[host];
  const int len = static_cast<int>(cycle.size());
  for (int i = 0; i < len; ++i) {
    const DartId d = cycle[i];
    const VertexId s = base.tail[d];
    if (!g.is_sink(s) || used[s]) continue;
    used[s] = 1;
    // The host face sits in the corner from d to reverse(previous dart); open
    // the rotation there.
    const DartId arrive = cycle[(i - 1 + len) % len];
    const auto& rot = base.rotation[s];
    const int deg = static_cast<int>(rot.size());
    const int first = base.position[reverse(arrive)];
    for (int k = 0; k < deg; ++k) merged.push_back(rot[(first + k) % deg]);
  }
  for (VertexId s : sinks) {
    for (DartId d : base.rotation[s]) emb.tail[d] = n;
    emb.rotation[s].clear();
  }
  emb.rotation.push_back(std::move(merged));
  emb.rebuild_positions();
  te.faces = trace_faces(emb);
  if (euler_characteristic(emb, te.faces) != 2) {
    throw SolverError("sinks not on a common face: merging them breaks planarity");
  }
  te.embedding = std::move(emb);
  te.merged_sink = n;
  te.dual = build_dual(te.embedding, te.faces, g.root());
  return te;
}

namespace {

double distance_to_integer(double x) { return std::fabs(x - std::nearbyint(x)); }
double distance_to_integer(const Rational& x) {
  const Rational f = x - floor_value(x);
  return std::min(f, Rational(1 - f)).get_d();
}

// Start of the union of arcs that form one contiguous block: the arc after the
// largest gap.
template <TilerScalar S>
std::pair<S, S> contiguous_union(std::vector<std::pair<S, S>> arcs) {
  std::sort(arcs.begin(), arcs.end());
  S total = 0;
  for (const auto& a : arcs) total += a.second;
  std::size_t best = 0;
  S best_gap = -2;
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const auto& prev = arcs[(i + arcs.size() - 1) % arcs.size()];
    S gap = wrap_unit<S>(arcs[i].first - prev.first - prev.second);
    if constexpr (!is_exact_v<S>) {
      if (gap > 1.0 - 1e-9) gap -= 1.0;
    }
    if (gap > best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  return {arcs[best].first, total};
}

template <TilerScalar S>
bool near_zero(const S& x, const S& tol) {
  return abs_value(x) <= tol;
}

}  // namespace

template <TilerScalar S>
FaceWidths<S> assign_dual_widths(const TilingEmbedding& te, const HarmonicProfile<S>& p, const WidthOptions& opts) {
  const int F = te.faces.count();
  FaceWidths<S> out;
  out.width = Vec<S>::Zero(F);
  out.zeta = opts.zeta.value_or(te.dual.zeta);
  if (out.zeta < 0 || out.zeta >= F) throw InputError("zeta: face index out of range");
  std::vector<char> seen(F, 0);
  seen[out.zeta] = 1;
  std::vector<DartId> frontier(te.faces.cycles[out.zeta].begin(), te.faces.cycles[out.zeta].end());
  std::optional<CounterRng> rng;
  if (opts.tree_seed) rng.emplace(*opts.tree_seed, 0x7ee5eedULL);
  std::size_t head = 0;
  while (head < frontier.size()) {
    DartId d;
    if (rng) {
      const std::size_t pick = head + static_cast<std::size_t>(rng->uniform() * (frontier.size() - head));
      std::swap(frontier[head], frontier[std::min(pick, frontier.size() - 1)]);
    }
    d = frontier[head++];
    const int left = te.dual.tail(d);
    const int right = te.dual.head(d);
    if (seen[right]) continue;
    seen[right] = 1;
    out.width[right] = wrap_unit<S>(S(out.width[left] - p.flow[d]));
    for (DartId x : te.faces.cycles[right]) frontier.push_back(x);
  }
  for (DartId d = 0; d < static_cast<DartId>(p.flow.size()); ++d) {
    const S sum = out.width[te.dual.tail(d)] - out.width[te.dual.head(d)] - p.flow[d];
    out.max_cycle_defect = std::max(out.max_cycle_defect, distance_to_integer(sum));
  }
  const double tol = is_exact_v<S> ? 0.0 : opts.cycle_tolerance;
  if (out.max_cycle_defect > tol) {
    throw SolverError("inconsistent flow: a dual cycle sum is " + std::to_string(out.max_cycle_defect) +
                      " away from an integer (network not uniquely absorbing)");
  }
  return out;
}

template <TilerScalar S>
Tiling<S> place_rectangles(const PlanarGraph& g, const TilingEmbedding& te, const HarmonicProfile<S>& p,
                           const FaceWidths<S>& widths) {
  Tiling<S> t;
  t.graph = std::make_shared<const PlanarGraph>(g);
  t.profile = p;
  t.face_width = widths.width;
  t.zeta = widths.zeta;
  t.max_cycle_defect = widths.max_cycle_defect;
  t.rects.resize(g.num_edges());
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const DartId down = p.flow[forward_dart(e)] >= 0 ? forward_dart(e) : backward_dart(e);
    Rect<S>& r = t.rects[e];
    r.down = down;
    r.width = p.flow[down];
    r.h_high = p.h[g.tail(down)];
    r.h_low = p.h[g.head(down)];
    r.w_start = widths.width[te.faces.face_of[reverse(down)]];
    r.degenerate = r.h_high == r.h_low;
  }
  t.intervals.resize(g.num_vertices());
  for (VertexId x = 0; x < g.num_vertices(); ++x) {
    std::vector<std::pair<S, S>> above, below;
    for (DartId d : g.rotation(x)) {
      const Rect<S>& r = t.rects[edge_of(d)];
      if (r.degenerate) continue;
      (r.down == d ? below : above).emplace_back(r.w_start, r.width);
    }
    VertexInterval<S>& iv = t.intervals[x];
    iv.height = p.h[x];
    const auto& side = above.empty() ? below : above;
    if (side.empty()) {
      // No flow through x: a point on the circle.
      iv.w_start = widths.width[te.faces.face_of[g.rotation(x).front()]];
      continue;
    }
    std::tie(iv.w_start, iv.width) = contiguous_union<S>(side);
    if constexpr (is_exact_v<S>) {
      iv.full_circle = iv.width == 1;
    } else {
      iv.full_circle = std::fabs(iv.width - 1.0) <= 1e-9;
    }
  }
  return t;
}

template <TilerScalar S>
Tiling<S> tile_profile(const PlanarGraph& g, const HarmonicProfile<S>& profile, const WidthOptions& opts) {
  const HarmonicProfile<S> p = profile.eta == 1 ? profile : normalize_flow(profile);
  const TilingEmbedding te = tiling_embedding(g);
  return place_rectangles<S>(g, te, p, assign_dual_widths<S>(te, p, opts));
}

template <TilerScalar S>
Tiling<S> tile_killed(const PlanarGraph& g, const TileOptions& opts) {
  return tile_profile<S>(g, killed_profile<S>(g, opts.solver), opts.widths);
}

template <TilerScalar S>
LevelTiling<S> tile_level(const PlanarGraph& g, const Vec<S>& h, const S& level, const TileOptions& opts) {
  std::vector<S> heights(h.data(), h.data() + h.size());
  LevelCut<S> cut = cut_at_level<S>(g, heights, level);
  InducedSubgraph upper = cut.upper();
  Tiling<S> tiling = tile_killed<S>(upper.graph, opts);
  return LevelTiling<S>{std::move(cut), std::move(upper), std::move(tiling)};
}

Tiling<double> to_double(const Tiling<Rational>& t) {
  Tiling<double> out;
  out.graph = t.graph;
  out.profile = to_double(t.profile);
  out.rects.resize(t.rects.size());
  for (std::size_t e = 0; e < t.rects.size(); ++e) {
    const auto& r = t.rects[e];
    out.rects[e] = Rect<double>{r.down, r.w_start.get_d(), r.width.get_d(), r.h_low.get_d(), r.h_high.get_d(),
                                r.degenerate};
  }
  out.intervals.resize(t.intervals.size());
  for (std::size_t v = 0; v < t.intervals.size(); ++v) {
    const auto& iv = t.intervals[v];
    out.intervals[v] = VertexInterval<double>{iv.w_start.get_d(), iv.width.get_d(), iv.height.get_d(), iv.full_circle};
  }
  out.face_width.resize(t.face_width.size());
  for (Eigen::Index f = 0; f < t.face_width.size(); ++f) out.face_width[f] = t.face_width[f].get_d();
  out.zeta = t.zeta;
  out.max_cycle_defect = t.max_cycle_defect;
  return out;
}

// ---------------------------------------------------------------------------

template <TilerScalar S>
TilingAudit audit_tiling(const Tiling<S>& t, std::optional<double> tolerance) {
  const PlanarGraph& g = *t.graph;
  const HarmonicProfile<S>& p = t.profile;
  TilingAudit a;
  a.tolerance = is_exact_v<S> ? 0.0 : tolerance.value_or(1e-7);
  const S tol = is_exact_v<S> ? S(0) : S(a.tolerance);
  a.rects = static_cast<int>(t.rects.size());
  a.max_cycle_defect = t.max_cycle_defect;

  S worst_aspect = 0;
  S area = 0;
  for (std::size_t e = 0; e < t.rects.size(); ++e) {
    const Rect<S>& r = t.rects[e];
    const S height = r.h_high - r.h_low;
    area += r.width * height;
    if (r.degenerate) {
      ++a.degenerate;
      continue;
    }
    const S expected = p.conductance[e] * height;
    worst_aspect = std::max<S>(worst_aspect, S(abs_value(S(r.width - expected)) / expected));
    if (near_zero<S>(S(r.width - height), tol)) ++a.squares;
  }
  const S energy = dirichlet_energy(p, g);
  a.max_aspect_deviation = to_double(worst_aspect);
  a.total_area = to_double(area);
  a.energy = to_double(energy);
  a.aspect_ok = worst_aspect <= tol;
  a.area_ok = near_zero<S>(S(area - 1), tol);
  a.energy_ok = near_zero<S>(S(area - energy), S(tol / 100));

  // Sweep downwards through the distinct heights; between two consecutive
  // heights the active rectangles must tile the circle exactly once.
  std::vector<S> levels;
  for (const auto& r : t.rects) {
    if (r.degenerate) continue;
    levels.push_back(r.h_high);
    levels.push_back(r.h_low);
  }
  std::sort(levels.begin(), levels.end(), std::greater<>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::vector<std::vector<int>> starting(levels.size()), ending(levels.size());
  auto level_index = [&](const S& h) {
    return static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), h, std::greater<>()) -
                                    levels.begin());
  };
  for (std::size_t e = 0; e < t.rects.size(); ++e) {
    const auto& r = t.rects[e];
    if (r.degenerate) continue;
    starting[level_index(r.h_high)].push_back(static_cast<int>(e));
    ending[level_index(r.h_low)].push_back(static_cast<int>(e));
  }
  std::set<std::pair<S, int>> active;
  S worst_sum = 0, worst_overlap = 0, worst_gap = 0;
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    for (int e : ending[k]) active.erase({t.rects[e].w_start, e});
    for (int e : starting[k]) active.insert({t.rects[e].w_start, e});
    ++a.bands;
    S sum = 0;
    for (auto it = active.begin(); it != active.end(); ++it) {
      const Rect<S>& r = t.rects[it->second];
      sum += r.width;
      auto next = std::next(it);
      S gap;
      if (next == active.end()) {
        gap = active.begin()->first + 1 - (r.w_start + r.width);
      } else {
        gap = next->first - (r.w_start + r.width);
      }
      if (gap < 0) worst_overlap = std::max<S>(worst_overlap, S(-gap));
      if (gap > 0) worst_gap = std::max<S>(worst_gap, gap);
    }
    if (active.empty()) worst_gap = 1;
    worst_sum = std::max<S>(worst_sum, abs_value(S(sum - 1)));
  }
  a.max_band_sum_error = to_double(worst_sum);
  a.max_overlap = to_double(worst_overlap);
  a.max_gap = to_double(worst_gap);
  a.overlap_ok = worst_overlap <= tol;
  a.coverage_ok = worst_sum <= tol && worst_gap <= tol;

  S worst_kirchhoff = 0;
  for (VertexId x = 0; x < g.num_vertices(); ++x) {
    const VertexInterval<S>& iv = t.intervals[x];
    S in = 0, out = 0;
    for (DartId d : g.rotation(x)) {
      const Rect<S>& r = t.rects[edge_of(d)];
      if (r.degenerate) continue;
      (r.down == d ? out : in) += r.width;
      if (iv.full_circle) continue;
      S offset = wrap_unit<S>(S(r.w_start - iv.w_start));
      if constexpr (!is_exact_v<S>) {
        if (offset > 1.0 - a.tolerance) offset -= 1.0;
      }
      if (offset < -tol || offset + r.width > iv.width + tol) ++a.tangency_failures;
    }
    if (x != g.root() && !g.is_sink(x)) worst_kirchhoff = std::max<S>(worst_kirchhoff, abs_value(S(in - out)));
  }
  a.max_kirchhoff = to_double(worst_kirchhoff);
  a.kirchhoff_ok = worst_kirchhoff <= tol;
  a.tangency_ok = a.tangency_failures == 0;

  for (VertexId x = 0; x < g.num_vertices(); ++x) {
    if (x == g.root()) continue;
    const double h = to_double(t.intervals[x].height);
    if (!(h > 0.0)) continue;
    const int band = std::max(0, static_cast<int>(std::floor(-std::log2(h) - 1e-12)));
    if (band >= static_cast<int>(a.vertex_width_bands.size())) {
      for (int k = static_cast<int>(a.vertex_width_bands.size()); k <= band; ++k) a.vertex_width_bands.push_back({k, 0.0, 0});
    }
    auto& b = a.vertex_width_bands[band];
    b.max_width = std::max(b.max_width, to_double(t.intervals[x].width));
    ++b.vertices;
  }
  return a;
}

#define TILER_TILING_INSTANTIATE(S)                                                                  \
  template FaceWidths<S> assign_dual_widths<S>(const TilingEmbedding&, const HarmonicProfile<S>&,    \
                                               const WidthOptions&);                                 \
  template Tiling<S> place_rectangles<S>(const PlanarGraph&, const TilingEmbedding&,                 \
                                         const HarmonicProfile<S>&, const FaceWidths<S>&);           \
  template Tiling<S> tile_killed<S>(const PlanarGraph&, const TileOptions&);                         \
  template Tiling<S> tile_profile<S>(const PlanarGraph&, const HarmonicProfile<S>&, const WidthOptions&); \
  template LevelTiling<S> tile_level<S>(const PlanarGraph&, const Vec<S>&, const S&, const TileOptions&); \
  template TilingAudit audit_tiling<S>(const Tiling<S>&, std::optional<double>);

TILER_TILING_INSTANTIATE(double)
TILER_TILING_INSTANTIATE(Rational)

}  // namespace tiler
