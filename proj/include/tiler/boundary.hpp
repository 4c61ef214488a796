#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tiler/arcs.hpp"
#include "tiler/harmonic.hpp"
#include "tiler/tiling.hpp"
#include "tiler/walk.hpp"

namespace tiler {

struct SharpOptions {
  std::vector<VertexId> probes;  // default: the root and up to two neighbours
  std::vector<double> levels;    // refinement levels; default 2^-k below the probes
  double tolerance = 1e-3;
  SolverOptions solver;
};

/// Harmonic function with boundary data read off an arc set: a sink b gets the
/// fraction of its interval T(b) covered by the arc.
struct SharpFunction {
  static constexpr double kThreshold = 0.5;

  ArcSet arc;
  std::string expression;
  std::shared_ptr<const PlanarGraph> graph;
  std::vector<double> values;  // per vertex

  std::vector<VertexId> probes;
  std::vector<double> levels;                     // refinement levels; the last is 0 (the sinks)
  std::vector<std::vector<double>> probe_values;  // per level, per probe
  double gap = 0.0;                               // probe change between the last two refinements
  bool converged = false;
  double harmonic_residual = 0.0;

  double operator()(VertexId v) const { return values[v]; }
};

/// Fraction of T(b) inside `arc` for every vertex b (points count by membership).
std::vector<double> arc_coverage(const Tiling<double>& t, const ArcSet& arc);

SharpFunction sharp_from_arc(const Tiling<double>& t, const ArcSet& arc, const SharpOptions& opts = {});

enum class SharpOp { kUnion, kIntersection, kComplement };

/// Arc-level combination followed by a fresh solve; the complement is 1 - s.
SharpFunction combine_sharp(const Tiling<double>& t, std::span<const SharpFunction> parts, SharpOp op,
                            const SharpOptions& opts = {});

// ---------------------------------------------------------------------------
// Limit proxies

struct ProxyOptions {
  int window = 20;      // K
  double epsilon = 0.05;  // eps_0
  double max_middle = 0.01;
};

enum class Limit { kZero, kOne, kMiddle };

struct SharpnessReport {
  VertexId start = kNoVertex;
  double value = 0.0;  // s(start)
  std::int64_t trials = 0, completed = 0, censored = 0;
  std::int64_t one = 0, zero = 0, middle = 0;
  std::int64_t path_one = 0, path_zero = 0, path_middle = 0;
  double tolerance = 0.02;
  double max_middle = 0.01;

  void merge(const SharpnessReport& o);
  double fraction(std::int64_t k) const { return completed ? static_cast<double>(k) / static_cast<double>(completed) : 0.0; }
  bool value_ok() const { return std::abs(fraction(one) - value) <= tolerance; }
  bool sharp_ok() const { return fraction(middle) < max_middle; }
  bool passed() const { return value_ok() && sharp_ok() && completed > 0; }
};

/// Walks from z: the fraction whose s-values tend to 1 should be s(z), and
/// almost every walk should settle near 0 or 1. A walk's limit is read off its
/// final K recorded values. The stopped walk stays at its absorbing vertex, so
/// for an absorbed walk these are all s(absorbing vertex); the path_* counts
/// use the last K steps actually taken instead.
SharpnessReport verify_sharpness(const SharpFunction& s, VertexId z, const WalkConfig& cfg,
                                 const ProxyOptions& proxy = {});

struct AdeReport {
  bool upper = true;  // start in {s > 1 - eps}, else in {s < eps}
  double epsilon = 0.1, delta = 0.5;
  VertexId start = kNoVertex;
  double start_value = 0.0;
  std::int64_t trials = 0, completed = 0, censored = 0, visits = 0;

  void merge(const AdeReport& o);
  double rate() const { return completed ? static_cast<double>(visits) / static_cast<double>(completed) : 0.0; }
  double sigma() const;
  double bound() const { return epsilon / delta; }
  bool passed() const { return completed > 0 && rate() <= bound() + 3 * sigma(); }
};

/// From the vertex of {s > 1 - eps} with the smallest value (and symmetrically
/// from {s < eps}), the probability of ever reaching {s <= 1 - delta}
/// (resp. {s >= delta}) stays below eps / delta. Starts exclude sinks.
std::vector<AdeReport> ade_check(const SharpFunction& s, const WalkConfig& cfg, double epsilon = 0.1,
                                 double delta = 0.5);

struct AlternationReport {
  double r = 0.1;
  std::int64_t trials = 0, completed = 0, censored = 0;
  std::vector<std::int64_t> at_least;  // index k - 1: walks with >= k alternations

  void merge(const AlternationReport& o);
  double rate(int k) const;
  double sigma(int k) const;
  double envelope(int k) const;
  bool passed() const;
};

/// Alternations of the walk from the root between {s > 1 - r} and {s < r}.
AlternationReport noalter_check(const SharpFunction& s, const WalkConfig& cfg, double r = 0.1, int max_k = 4);

/// True when some non-sink vertex has s > threshold.
bool has_vertex_above(const SharpFunction& s, double threshold);

/// Fraction of walks from the start vertex whose limit for `combined`
/// disagrees with `op` applied to their limits for `parts`.
double tail_event_mismatch(std::span<const SharpFunction> parts, const SharpFunction& combined, SharpOp op,
                           const WalkConfig& cfg, const ProxyOptions& proxy = {});

// ---------------------------------------------------------------------------
// Level sets

struct LevelClassification {
  double level = 0.0;
  std::vector<double> value;   // s at each vertex of B_n, interpolated along its edge
  std::vector<double> start;   // T(b)
  std::vector<double> width;
  ArcSet upper;                // projection of F_n = {s > 1/2}
  ArcSet lower;                // projection of F'_n = {s < 1/2}
  double f_minus_x = 0.0;      // w(F_n \ X_n), X_n = {s > 1 - eps_n}
};

struct DriftStep {
  int m = 0, n = 0;  // indices into the level list
  double symmetric_difference = 0.0;
  double impurity = 0.0;  // w(M^m_n)
};

struct LevelSetDrift {
  std::vector<LevelClassification> levels;
  std::vector<DriftStep> steps;     // consecutive pairs
  std::vector<double> to_deepest;   // w(F_m sym.diff. F_last) for every m but the last
  double terminal = 0.0;            // the last pair
  bool monotone = false;            // to_deepest non-increasing up to `slack`
  bool sufficient = false;
};

/// eps_n defaults to 2^-(n+1) for the n-th level (0-based).
LevelSetDrift level_set_drift(const SharpFunction& s, const Tiling<double>& t, std::span<const double> levels,
                              double slack = 1e-9);

/// Levels 2^-1, 2^-2, ... above the lowest non-sink height, nudged off vertex heights.
std::vector<double> dyadic_levels(const Tiling<double>& t, int max_levels = 64);

struct FaithfulnessReport {
  ArcSet estimate;  // points eventually in the projected F-sets
  std::int64_t trials = 0, completed = 0, censored = 0, mismatches = 0;
  double tolerance = 0.02;

  void merge(const FaithfulnessReport& o);
  double rate() const { return completed ? static_cast<double>(mismatches) / static_cast<double>(completed) : 0.0; }
  double sigma() const;
  bool passed() const { return completed > 0 && rate() < tolerance; }
};

/// Estimates X as the points lying in every projected F-set of the deeper half
/// of the levels, then counts walks whose s-limit disagrees with whether their
/// boundary point lies in X.
FaithfulnessReport faithfulness_audit(const SharpFunction& s, const Tiling<double>& t, const LevelSetDrift& drift,
                                      const WalkConfig& cfg, const ProxyOptions& proxy = {});

// ---------------------------------------------------------------------------

enum class CheckStatus { kPass, kFail, kInsufficient };

struct CriterionCheck {
  std::string name;
  CheckStatus status = CheckStatus::kFail;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct LayeredReport {
  std::vector<CriterionCheck> checks;
  bool passed() const;
};

struct LayeredOptions {
  double diameter_tolerance = 0.01;
  double band_tolerance = 1e-7;
  double drift_tolerance = 0.05;
};

/// (a) walks converge, (b) exit laws of the level sets equal the projected
/// widths, (c) every sharp function's level-set drift dies out.
LayeredReport layered_criterion(const Tiling<double>& t, std::span<const SharpFunction> sharp,
                                std::span<const double> levels, const WalkConfig& cfg,
                                const LayeredOptions& opts = {});

/// Width of B_n atoms read from the cut edges' rectangles.
struct LevelExit {
  double level = 0.0;
  LevelCut<double> cut;
  std::vector<double> widths;
  ExitStats stats;
};

LevelExit level_exit(const Tiling<double>& t, double level, const WalkConfig& cfg);

const char* to_string(CheckStatus s);

}  // namespace tiler
