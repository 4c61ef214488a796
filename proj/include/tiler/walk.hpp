#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "tiler/arcs.hpp"
#include "tiler/graph.hpp"
#include "tiler/rng.hpp"
#include "tiler/tiling.hpp"

namespace tiler {

enum class KillRule {
  kSinks,     // absorbed at the graph's sinks
  kLevelSet,  // absorbed at WalkConfig::level_set or a sink
  kNone,      // runs to the step cap
};

struct WalkConfig {
  std::uint64_t seed = 1;
  std::int64_t trials = 100000;
  std::int64_t step_cap = 1000000;
  KillRule kill = KillRule::kSinks;
  std::vector<char> level_set;      // per vertex, used by kLevelSet
  bool horizontal_sampling = false;  // uniform point of the current span each step
  double max_censor_rate = 1e-3;
  int threads = 0;  // 0: hardware concurrency
  VertexId start = kNoVertex;  // default: the root

  void validate(const PlanarGraph& g) const;
  VertexId start_vertex(const PlanarGraph& g) const { return start == kNoVertex ? g.root() : start; }
};

/// Vertices where a walk under `cfg` stops.
std::vector<char> absorbing_set(const PlanarGraph& g, const WalkConfig& cfg);

/// Integer sum on a 2^-48 grid: merges are exact and order-free.
class FixedSum {
 public:
  void add(double x) { value_ += static_cast<__int128>(std::nearbyint(std::ldexp(x, 48))); }
  void merge(const FixedSum& o) { value_ += o.value_; }
  double value() const { return std::ldexp(static_cast<double>(value_), -48); }
  bool operator==(const FixedSum&) const = default;

 private:
  __int128 value_ = 0;
};

/// Transition sampler with per-vertex cumulative conductances in rotation order.
class Walker {
 public:
  explicit Walker(const PlanarGraph& g);

  DartId next_dart(VertexId x, CounterRng& rng) const;
  VertexId step(VertexId x, CounterRng& rng) const { return g_->head(next_dart(x, rng)); }
  const PlanarGraph& graph() const { return *g_; }

 private:
  const PlanarGraph* g_;
  std::vector<int> offset_;
  std::vector<DartId> dart_;
  std::vector<double> cumulative_;
};

/// One draw from p(x, .) = c(xy) / pi_x. Throws InputError at isolated vertices.
VertexId sample_step(const PlanarGraph& g, VertexId x, CounterRng& rng);

double total_variation(std::span<const double> p, std::span<const double> q);

/// 4 sqrt(K / N), capped at 0.02.
double tv_tolerance(std::size_t atoms, std::int64_t samples);

/// Runs trials [0, N) in fixed-size chunks on worker threads. Each worker
/// folds its chunks into its own accumulator; all statistics are integer
/// sums, so the merged result does not depend on the schedule.
template <class Stats, class Fn>
Stats run_chunked(std::int64_t trials, int threads, const Stats& zero, Fn&& fn) {
  constexpr std::int64_t kChunk = 8192;
  const std::int64_t chunks = (trials + kChunk - 1) / kChunk;
  int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = static_cast<int>(std::min<std::int64_t>(workers, std::max<std::int64_t>(chunks, 1)));
  std::vector<Stats> partial(workers, zero);
  auto work = [&](int w) {
    for (std::int64_t c = w; c < chunks; c += workers) {
      fn(partial[w], c * kChunk, std::min(trials, (c + 1) * kChunk));
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  Stats out = zero;
  for (const Stats& s : partial) out.merge(s);
  return out;
}

// ---------------------------------------------------------------------------
// Exit and last-visit distributions

struct ExitStats {
  std::uint64_t seed = 0;
  std::int64_t trials = 0;
  std::int64_t completed = 0;
  std::int64_t censored = 0;
  std::int64_t missed = 0;  // absorbed without visiting the target set
  std::int64_t steps = 0;
  std::vector<VertexId> atoms;
  std::vector<std::int64_t> counts;  // per atom

  std::vector<double> expected;  // reference distribution, when supplied
  double tv = 0.0;
  double tv_bound = 0.0;

  void merge(const ExitStats& o);
  std::vector<double> distribution() const;
  double censor_rate() const { return trials ? static_cast<double>(censored) / static_cast<double>(trials) : 0.0; }

  /// Sets the reference distribution and the TV distance to it.
  void compare(std::vector<double> reference);
  bool passed(double max_censor_rate) const { return tv <= tv_bound && censor_rate() <= max_censor_rate; }
};

/// First vertex of `boundary` hit by the walk from the start vertex.
ExitStats exit_distribution(const PlanarGraph& g, std::span<const VertexId> boundary, const WalkConfig& cfg);

/// Last vertex of `target` visited before the walk is absorbed.
ExitStats last_visit_distribution(const PlanarGraph& g, std::span<const VertexId> target, const WalkConfig& cfg);

/// Interval widths of the given vertices.
std::vector<double> interval_widths(const Tiling<double>& t, std::span<const VertexId> vertices);

// ---------------------------------------------------------------------------
// Net traversal counts

struct FluxStats {
  std::int64_t trials = 0;
  std::int64_t completed = 0;
  std::int64_t censored = 0;
  std::vector<DartId> darts;
  std::vector<std::int64_t> total, total_sq;        // whole walk, per dart
  std::vector<std::int64_t> interior, interior_sq;  // interior subwalks only
  std::int64_t interior_subwalks = 0;
  std::vector<double> expected;  // flow(d) when supplied

  void merge(const FluxStats& o);
  double mean(std::int64_t sum) const { return completed ? static_cast<double>(sum) / static_cast<double>(completed) : 0.0; }
  /// Standard error of the mean from the per-trial second moment.
  double sigma(std::int64_t sum, std::int64_t sq) const;
  bool passed(double k = 4.0) const;
};

/// Net traversals of `darts`, split off for the subwalks that start and end in
/// `level` without visiting it in between (excluding the final subwalk).
FluxStats interior_subwalk_flux(const PlanarGraph& g, std::span<const VertexId> level, std::span<const DartId> darts,
                                const WalkConfig& cfg);

// ---------------------------------------------------------------------------
// Meridians

struct MeridianStats {
  double meridian = 0.0;
  std::int64_t trials = 0;
  std::int64_t completed = 0;
  std::int64_t censored = 0;
  std::vector<VertexId> vertices;  // spans met by the meridian
  std::vector<std::int64_t> left_to_right, right_to_left, net_sq;  // per vertex
  std::int64_t net_total = 0;
  std::int64_t net_total_sq = 0;

  void merge(const MeridianStats& o);
  double sigma(std::size_t i) const;
  double sigma_total() const;
  bool passed(double k = 4.0) const;
};

/// Crossings of the meridian at width `meridian`, counted at every vertex
/// whose (proper) span it meets. Each edge traversal happens at a uniform
/// point of the edge's rectangle; with horizontal sampling the particle also
/// rests at a uniform point of the current span. Throws InputError
/// ("perturb meridian") when the meridian hits a span endpoint.
MeridianStats meridian_flux(const Tiling<double>& t, double meridian, const WalkConfig& cfg);

// ---------------------------------------------------------------------------
// Convergence to the boundary circle

struct TrajectoryStats {
  std::int64_t trials = 0;
  std::int64_t completed = 0;
  std::int64_t censored = 0;
  std::vector<std::int64_t> final_counts;  // per vertex where walks ended
  FixedSum diameter;                       // sum of final interval widths
  std::vector<std::pair<double, double>> meridian_pairs;
  std::vector<std::int64_t> alternations, alternations_sq;  // per pair, over all trials
  std::vector<std::int64_t> checkpoints;                    // steps 1, 2, 4, ...
  std::vector<FixedSum> height, height_sq;                  // h(Z_t) at checkpoints

  void merge(const TrajectoryStats& o);
  double mean_diameter() const;
  double mean_alternations(std::size_t pair) const;
  double alternation_sigma(std::size_t pair) const;
  double mean_height(std::size_t k) const;
  double height_sigma(std::size_t k) const;
};

struct TrajectoryOptions {
  std::vector<std::pair<double, double>> meridian_pairs;
};

TrajectoryStats trajectory_limit(const Tiling<double>& t, const WalkConfig& cfg, const TrajectoryOptions& opts = {});

/// Midpoint of a vertex interval on the circle.
double interval_midpoint(const VertexInterval<double>& iv);

/// Fraction of completed walks whose final midpoint lies in `arc`.
double boundary_mass(const TrajectoryStats& s, const Tiling<double>& t, const ArcSet& arc);

}  // namespace tiler
