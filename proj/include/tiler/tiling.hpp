#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "tiler/graph.hpp"
#include "tiler/harmonic.hpp"

namespace tiler {

/// The graph's rotation system with every sink merged into one vertex placed
/// inside a face that all sinks share. The merged vertex has id num_vertices();
/// sinks keep their ids but carry no darts.
struct TilingEmbedding {
  Embedding embedding;
  Faces faces;
  DualGraph dual;
  VertexId merged_sink = kNoVertex;
};

TilingEmbedding tiling_embedding(const PlanarGraph& g);

/// Rectangle of one edge on the cylinder (R/Z) x [0, 1]. `down` is the dart
/// from the higher to the lower endpoint; the rectangle spans
/// [w_start, w_start + width) mod 1 horizontally.
template <TilerScalar S>
struct Rect {
  DartId down = -1;
  S w_start = 0;
  S width = 0;
  S h_low = 0;
  S h_high = 0;
  bool degenerate = false;  // zero height (and width)
};

template <TilerScalar S>
struct VertexInterval {
  S w_start = 0;
  S width = 0;
  S height = 0;
  bool full_circle = false;
};

template <TilerScalar S>
struct Tiling {
  std::shared_ptr<const PlanarGraph> graph;
  HarmonicProfile<S> profile;  // normalized
  std::vector<Rect<S>> rects;  // per edge
  std::vector<VertexInterval<S>> intervals;  // per vertex
  Vec<S> face_width;  // per face of the tiling embedding
  int zeta = 0;
  double max_cycle_defect = 0.0;
};

struct WidthOptions {
  std::optional<std::uint64_t> tree_seed;  // random dual spanning tree
  std::optional<int> zeta;                 // reference face override
  double cycle_tolerance = 1e-9;
};

template <TilerScalar S>
struct FaceWidths {
  Vec<S> width;
  int zeta = 0;
  double max_cycle_defect = 0.0;  // distance of non-tree cycle sums from Z
};

/// w(zeta) = 0; crossing dart d from its left face to its right face lowers the
/// width by flow(d). Throws SolverError when a cycle sum is not an integer.
template <TilerScalar S>
FaceWidths<S> assign_dual_widths(const TilingEmbedding& te, const HarmonicProfile<S>& p,
                                 const WidthOptions& opts = {});

template <TilerScalar S>
Tiling<S> place_rectangles(const PlanarGraph& g, const TilingEmbedding& te, const HarmonicProfile<S>& p,
                           const FaceWidths<S>& widths);

struct TileOptions {
  SolverOptions solver;
  WidthOptions widths;
};

/// Solve, normalize, assign widths and place rectangles.
template <TilerScalar S>
Tiling<S> tile_killed(const PlanarGraph& g, const TileOptions& opts = {});

/// Tiling of a given (not necessarily harmonic-solved) profile.
template <TilerScalar S>
Tiling<S> tile_profile(const PlanarGraph& g, const HarmonicProfile<S>& profile, const WidthOptions& opts = {});

/// Killed tiling of the part above level l of g's killed profile.
template <TilerScalar S>
struct LevelTiling {
  LevelCut<S> cut;
  InducedSubgraph upper;
  Tiling<S> tiling;
};

template <TilerScalar S>
LevelTiling<S> tile_level(const PlanarGraph& g, const Vec<S>& h, const S& level, const TileOptions& opts = {});

Tiling<double> to_double(const Tiling<Rational>& t);

// ---------------------------------------------------------------------------

struct BandWidth {
  int band = 0;          // heights in (2^-(band+1), 2^-band]
  double max_width = 0;  // widest vertex interval in the band
  int vertices = 0;
};

struct TilingAudit {
  double tolerance = 0.0;  // 0 for the exact pipeline
  double max_aspect_deviation = 0.0;
  double total_area = 0.0;
  double energy = 0.0;
  double max_band_sum_error = 0.0;  // | sum of widths in a band - 1 |
  double max_overlap = 0.0;
  double max_gap = 0.0;
  int bands = 0;
  int tangency_failures = 0;
  double max_kirchhoff = 0.0;
  double max_cycle_defect = 0.0;
  int degenerate = 0;
  int squares = 0;
  int rects = 0;
  std::vector<BandWidth> vertex_width_bands;

  bool aspect_ok = false;
  bool area_ok = false;
  bool energy_ok = false;
  bool overlap_ok = false;
  bool coverage_ok = false;
  bool tangency_ok = false;
  bool kirchhoff_ok = false;

  bool passed() const {
    return aspect_ok && area_ok && energy_ok && overlap_ok && coverage_ok && tangency_ok && kirchhoff_ok;
  }
};

/// Geometric audit; tolerance defaults to 1e-7 for double and 0 for Rational.
template <TilerScalar S>
TilingAudit audit_tiling(const Tiling<S>& t, std::optional<double> tolerance = std::nullopt);

// ---------------------------------------------------------------------------

#define TILER_TILING_EXTERN(S)                                                                        \
  extern template FaceWidths<S> assign_dual_widths<S>(const TilingEmbedding&, const HarmonicProfile<S>&, \
                                                      const WidthOptions&);                            \
  extern template Tiling<S> place_rectangles<S>(const PlanarGraph&, const TilingEmbedding&,            \
                                                const HarmonicProfile<S>&, const FaceWidths<S>&);      \
  extern template Tiling<S> tile_killed<S>(const PlanarGraph&, const TileOptions&);                    \
  extern template Tiling<S> tile_profile<S>(const PlanarGraph&, const HarmonicProfile<S>&,             \
                                            const WidthOptions&);                                      \
  extern template LevelTiling<S> tile_level<S>(const PlanarGraph&, const Vec<S>&, const S&,            \
                                               const TileOptions&);                                    \
  extern template TilingAudit audit_tiling<S>(const Tiling<S>&, std::optional<double>);

TILER_TILING_EXTERN(double)
TILER_TILING_EXTERN(Rational)
#undef TILER_TILING_EXTERN

}  // namespace tiler
