#include "tiler/walk.hpp"

#include <numeric>

namespace tiler {

namespace {

// Stream tags keep the experiments on disjoint random streams for one seed.
// First-hit and last-visit share one, so the two coincide walk by walk when
// the target set is the absorbing set.
enum : std::uint64_t { kExitStream = 1, kFluxStream, kMeridianStream, kTrajectoryStream };

template <class T>
void add_into(std::vector<T>& a, const std::vector<T>& b) {
  if (a.empty()) a.resize(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
}

void add_into(std::vector<FixedSum>& a, const std::vector<FixedSum>& b) {
  if (a.empty()) a.resize(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) a[i].merge(b[i]);
}

double standard_error(double sum, double sq, double n) {
  if (n <= 0) return 0.0;
  const double m = sum / n;
  const double var = std::max(0.0, sq / n - m * m);
  return std::sqrt(var / n);
}

bool within(double mean, double target, double sigma, double k) {
  return std::fabs(mean - target) <= k * sigma + 1e-12;
}

// Offset of a width coordinate from the start of a span, folded so that points
// a hair before the start count as the start.
double span_offset(double x, double start, double width) {
  double off = x - start;
  off -= std::floor(off);
  if (off > width + 1e-9) off = 0.0;
  return off;
}

}  // namespace

std::vector<char> absorbing_set(const PlanarGraph& g, const WalkConfig& cfg) {
  std::vector<char> stop(g.num_vertices(), 0);
  if (cfg.kill == KillRule::kNone) return stop;
  for (VertexId s : g.sinks()) stop[s] = 1;
  if (cfg.kill == KillRule::kLevelSet) {
    for (VertexId v = 0; v < g.num_vertices(); ++v) stop[v] |= cfg.level_set[v];
  }
  return stop;
}

void WalkConfig::validate(const PlanarGraph& g) const {
  if (trials < 1) throw InputError("walk: trials must be >= 1");
  if (step_cap < 1) throw InputError("walk: step_cap must be >= 1");
  if (!(max_censor_rate >= 0.0)) throw InputError("walk: max_censor_rate must be >= 0");
  if (kill == KillRule::kLevelSet && static_cast<int>(level_set.size()) != g.num_vertices()) {
    throw InputError("walk: level_set must have one entry per vertex");
  }
  if (g.root() == kNoVertex) throw InputError("walk: graph has no root");
  if (start != kNoVertex && (start < 0 || start >= g.num_vertices())) throw InputError("walk: start out of range");
}

Walker::Walker(const PlanarGraph& g) : g_(&g), offset_(g.num_vertices() + 1, 0) {
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    double acc = 0.0;
    for (DartId d : g.rotation(v)) {
      acc += g.edge(edge_of(d)).conductance;
      dart_.push_back(d);
      cumulative_.push_back(acc);
    }
    offset_[v + 1] = static_cast<int>(dart_.size());
  }
}

DartId Walker::next_dart(VertexId x, CounterRng& rng) const {
  const int lo = offset_[x], hi = offset_[x + 1];
  if (lo == hi) throw InputError("walk: vertex '" + g_->label(x) + "' has no neighbours");
  const double u = rng.uniform() * cumulative_[hi - 1];
  for (int i = lo; i < hi - 1; ++i) {
    if (u < cumulative_[i]) return dart_[i];
  }
  return dart_[hi - 1];
}

VertexId sample_step(const PlanarGraph& g, VertexId x, CounterRng& rng) {
  const auto rot = g.rotation(x);
  if (rot.empty()) throw InputError("walk: vertex '" + g.label(x) + "' has no neighbours");
  std::vector<double> cumulative;
  double acc = 0.0;
  for (DartId d : rot) cumulative.push_back(acc += g.edge(edge_of(d)).conductance);
  const double u = rng.uniform() * acc;
  for (std::size_t i = 0; i + 1 < rot.size(); ++i) {
    if (u < cumulative[i]) return g.head(rot[i]);
  }
  return g.head(rot.back());
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InputError("total_variation: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - q[i]);
  return s / 2;
}

double tv_tolerance(std::size_t atoms, std::int64_t samples) {
  if (samples <= 0) return 0.02;
  return std::min(0.02, 4.0 * std::sqrt(static_cast<double>(atoms) / static_cast<double>(samples)));
}

// ---------------------------------------------------------------------------

void ExitStats::merge(const ExitStats& o) {
  trials += o.trials;
  completed += o.completed;
  censored += o.censored;
  missed += o.missed;
  steps += o.steps;
  add_into(counts, o.counts);
}

std::vector<double> ExitStats::distribution() const {
  std::vector<double> p(counts.size(), 0.0);
  const std::int64_t total = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  if (total == 0) return p;
  for (std::size_t i = 0; i < counts.size(); ++i) p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  return p;
}

void ExitStats::compare(std::vector<double> reference) {
  expected = std::move(reference);
  tv = total_variation(distribution(), expected);
  tv_bound = tv_tolerance(atoms.size(), completed - missed);
}

namespace {

ExitStats blank_exit(const WalkConfig& cfg, std::span<const VertexId> atoms) {
  ExitStats s;
  s.seed = cfg.seed;
  s.atoms.assign(atoms.begin(), atoms.end());
  s.counts.assign(atoms.size(), 0);
  return s;
}

std::vector<int> atom_index(const PlanarGraph& g, std::span<const VertexId> atoms) {
  std::vector<int> index(g.num_vertices(), -1);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i] < 0 || atoms[i] >= g.num_vertices()) throw InputError("walk: target vertex out of range");
    index[atoms[i]] = static_cast<int>(i);
  }
  return index;
}

}  // namespace

ExitStats exit_distribution(const PlanarGraph& g, std::span<const VertexId> boundary, const WalkConfig& cfg) {
  cfg.validate(g);
  const Walker walker(g);
  const auto stop = absorbing_set(g, cfg);
  const auto index = atom_index(g, boundary);
  return run_chunked(cfg.trials, cfg.threads, blank_exit(cfg, boundary),
                     [&](ExitStats& s, std::int64_t first, std::int64_t last) {
                       for (std::int64_t trial = first; trial < last; ++trial) {
                         CounterRng rng(cfg.seed, trial, kExitStream);
                         VertexId x = cfg.start_vertex(g);
                         std::int64_t steps = 0;
                         ++s.trials;
                         while (true) {
                           if (index[x] >= 0) {
                             ++s.counts[index[x]];
                             ++s.completed;
                             break;
                           }
                           if (stop[x]) {
                             ++s.missed;
                             ++s.completed;
                             break;
                           }
                           if (steps == cfg.step_cap) {
                             ++s.censored;
                             break;
                           }
                           x = walker.step(x, rng);
                           ++steps;
                         }
                         s.steps += steps;
                       }
                     });
}

ExitStats last_visit_distribution(const PlanarGraph& g, std::span<const VertexId> target, const WalkConfig& cfg) {
  cfg.validate(g);
  const Walker walker(g);
  const auto stop = absorbing_set(g, cfg);
  const auto index = atom_index(g, target);
  return run_chunked(cfg.trials, cfg.threads, blank_exit(cfg, target),
                     [&](ExitStats& s, std::int64_t first, std::int64_t last) {
                       for (std::int64_t trial = first; trial < last; ++trial) {
                         CounterRng rng(cfg.seed, trial, kExitStream);
                         VertexId x = cfg.start_vertex(g);
                         int last_atom = -1;
                         std::int64_t steps = 0;
                         ++s.trials;
                         while (true) {
                           if (index[x] >= 0) last_atom = index[x];
                           if (stop[x]) {
                             ++s.completed;
                             if (last_atom >= 0) {
                               ++s.counts[last_atom];
                             } else {
                               ++s.missed;
                             }
                             break;
                           }
                           if (steps == cfg.step_cap) {
                             ++s.censored;
                             break;
                           }
                           x = walker.step(x, rng);
                           ++steps;
                         }
                         s.steps += steps;
                       }
                     });
}

std::vector<double> interval_widths(const Tiling<double>& t, std::span<const VertexId> vertices) {
  std::vector<double> w;
  w.reserve(vertices.size());
  for (VertexId v : vertices) w.push_back(t.intervals.at(v).width);
  return w;
}

// ---------------------------------------------------------------------------

void FluxStats::merge(const FluxStats& o) {
  trials += o.trials;
  completed += o.completed;
  censored += o.censored;
  interior_subwalks += o.interior_subwalks;
  add_into(total, o.total);
  add_into(total_sq, o.total_sq);
  add_into(interior, o.interior);
  add_into(interior_sq, o.interior_sq);
}

double FluxStats::sigma(std::int64_t sum, std::int64_t sq) const {
  return standard_error(static_cast<double>(sum), static_cast<double>(sq), static_cast<double>(completed));
}

bool FluxStats::passed(double k) const {
  for (std::size_t i = 0; i < darts.size(); ++i) {
    if (!within(mean(interior[i]), 0.0, sigma(interior[i], interior_sq[i]), k)) return false;
    if (!expected.empty() && !within(mean(total[i]), expected[i], sigma(total[i], total_sq[i]), k)) return false;
  }
  return true;
}

FluxStats interior_subwalk_flux(const PlanarGraph& g, std::span<const VertexId> level, std::span<const DartId> darts,
                                const WalkConfig& cfg) {
  cfg.validate(g);
  const Walker walker(g);
  const auto stop = absorbing_set(g, cfg);
  std::vector<char> on_level(g.num_vertices(), 0);
  for (VertexId v : level) on_level.at(v) = 1;
  std::vector<int> forward(g.num_darts(), -1), backward(g.num_darts(), -1);
  for (std::size_t i = 0; i < darts.size(); ++i) {
    if (darts[i] < 0 || darts[i] >= g.num_darts()) throw InputError("walk: dart out of range");
    forward[darts[i]] = static_cast<int>(i);
    backward[reverse(darts[i])] = static_cast<int>(i);
  }
  const std::size_t k = darts.size();
  FluxStats zero;
  zero.darts.assign(darts.begin(), darts.end());
  zero.total.assign(k, 0);
  zero.total_sq.assign(k, 0);
  zero.interior.assign(k, 0);
  zero.interior_sq.assign(k, 0);

  return run_chunked(cfg.trials, cfg.threads, zero, [&](FluxStats& s, std::int64_t first, std::int64_t last) {
    std::vector<std::int64_t> total(k), pending(k), interior(k);
    for (std::int64_t trial = first; trial < last; ++trial) {
      CounterRng rng(cfg.seed, trial, kFluxStream);
      std::fill(total.begin(), total.end(), 0);
      std::fill(pending.begin(), pending.end(), 0);
      std::fill(interior.begin(), interior.end(), 0);
      std::int64_t subwalks = 0;
      VertexId x = cfg.start_vertex(g);
      bool started_on_level = on_level[x] != 0;
      std::int64_t steps = 0;
      bool censored = false;
      ++s.trials;
      while (!stop[x]) {
        if (steps == cfg.step_cap) {
          censored = true;
          break;
        }
        const DartId d = walker.next_dart(x, rng);
        ++steps;
        if (forward[d] >= 0) {
          ++total[forward[d]];
          ++pending[forward[d]];
        }
        if (backward[d] >= 0) {
          --total[backward[d]];
          --pending[backward[d]];
        }
        x = g.head(d);
        if (on_level[x]) {
          if (started_on_level && !stop[x]) {
            for (std::size_t i = 0; i < k; ++i) interior[i] += pending[i];
            ++subwalks;
          }
          std::fill(pending.begin(), pending.end(), 0);
          started_on_level = true;
        }
      }
      if (censored) {
        ++s.censored;
        continue;
      }
      ++s.completed;
      s.interior_subwalks += subwalks;
      for (std::size_t i = 0; i < k; ++i) {
        s.total[i] += total[i];
        s.total_sq[i] += total[i] * total[i];
        s.interior[i] += interior[i];
        s.interior_sq[i] += interior[i] * interior[i];
      }
    }
  });
}

// ---------------------------------------------------------------------------

void MeridianStats::merge(const MeridianStats& o) {
  trials += o.trials;
  completed += o.completed;
  censored += o.censored;
  net_total += o.net_total;
  net_total_sq += o.net_total_sq;
  add_into(left_to_right, o.left_to_right);
  add_into(right_to_left, o.right_to_left);
  add_into(net_sq, o.net_sq);
}

double MeridianStats::sigma(std::size_t i) const {
  return standard_error(static_cast<double>(left_to_right[i] - right_to_left[i]), static_cast<double>(net_sq[i]),
                        static_cast<double>(completed));
}

double MeridianStats::sigma_total() const {
  return standard_error(static_cast<double>(net_total), static_cast<double>(net_total_sq),
                        static_cast<double>(completed));
}

bool MeridianStats::passed(double k) const {
  const double n = static_cast<double>(std::max<std::int64_t>(completed, 1));
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!within(static_cast<double>(left_to_right[i] - right_to_left[i]) / n, 0.0, sigma(i), k)) return false;
  }
  return within(static_cast<double>(net_total) / n, 0.0, sigma_total(), k);
}

MeridianStats meridian_flux(const Tiling<double>& t, double meridian, const WalkConfig& cfg) {
  const PlanarGraph& g = *t.graph;
  cfg.validate(g);
  meridian -= std::floor(meridian);
  const Walker walker(g);
  const auto stop = absorbing_set(g, cfg);

  MeridianStats zero;
  zero.meridian = meridian;
  std::vector<int> slot(g.num_vertices(), -1);
  std::vector<double> cut(g.num_vertices(), 0.0);  // offset of the meridian inside the span
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    const auto& iv = t.intervals[v];
    if (iv.full_circle) continue;
    double off = meridian - iv.w_start;
    off -= std::floor(off);
    const double from_end = std::fabs(off - iv.width);
    if (off < 1e-12 || from_end < 1e-12 || 1.0 - off < 1e-12) {
      throw InputError("meridian at " + std::to_string(meridian) + " meets an endpoint of the span of '" + g.label(v) +
                       "': perturb meridian");
    }
    if (off >= iv.width || v == g.root() || g.is_sink(v)) continue;
    slot[v] = static_cast<int>(zero.vertices.size());
    cut[v] = off;
    zero.vertices.push_back(v);
  }
  const std::size_t k = zero.vertices.size();
  zero.left_to_right.assign(k, 0);
  zero.right_to_left.assign(k, 0);
  zero.net_sq.assign(k, 0);

  // Uniform point of the rectangle of the edge of d, as an offset in the span of x.
  auto crossing_point = [&](DartId d, VertexId x, CounterRng& rng) {
    const auto& r = t.rects[edge_of(d)];
    const auto& iv = t.intervals[x];
    return span_offset(r.w_start + rng.uniform() * r.width, iv.w_start, iv.width);
  };

  return run_chunked(cfg.trials, cfg.threads, zero, [&](MeridianStats& s, std::int64_t first, std::int64_t last) {
    std::vector<std::int64_t> net(k, 0), l2r(k, 0), r2l(k, 0);
    std::vector<int> touched;
    std::vector<char> seen(k, 0);
    for (std::int64_t trial = first; trial < last; ++trial) {
      CounterRng rng(cfg.seed, trial, kMeridianStream);
      for (int i : touched) net[i] = l2r[i] = r2l[i] = seen[i] = 0;
      touched.clear();
      VertexId x = cfg.start_vertex(g);
      DartId arrival = -1;
      std::int64_t steps = 0;
      bool censored = false;
      ++s.trials;
      while (!stop[x]) {
        if (steps == cfg.step_cap) {
          censored = true;
          break;
        }
        const DartId d = walker.next_dart(x, rng);
        ++steps;
        const int i = slot[x];
        if (i >= 0 && arrival >= 0) {
          double path[3];
          int points = 0;
          path[points++] = crossing_point(arrival, x, rng);
          if (cfg.horizontal_sampling) path[points++] = rng.uniform() * t.intervals[x].width;
          path[points++] = crossing_point(d, x, rng);
          if (!seen[i]) {
            seen[i] = 1;
            touched.push_back(i);
          }
          for (int j = 0; j + 1 < points; ++j) {
            const bool was_right = path[j] >= cut[x];
            const bool is_right = path[j + 1] >= cut[x];
            if (!was_right && is_right) {
              ++l2r[i];
              ++net[i];
            } else if (was_right && !is_right) {
              ++r2l[i];
              --net[i];
            }
          }
        }
        arrival = d;
        x = g.head(d);
      }
      if (censored) {
        ++s.censored;
        continue;
      }
      ++s.completed;
      std::int64_t sum = 0;
      for (int i : touched) {
        s.left_to_right[i] += l2r[i];
        s.right_to_left[i] += r2l[i];
        s.net_sq[i] += net[i] * net[i];
        sum += net[i];
      }
      s.net_total += sum;
      s.net_total_sq += sum * sum;
    }
  });
}

// ---------------------------------------------------------------------------

void TrajectoryStats::merge(const TrajectoryStats& o) {
  trials += o.trials;
  completed += o.completed;
  censored += o.censored;
  add_into(final_counts, o.final_counts);
  diameter.merge(o.diameter);
  add_into(alternations, o.alternations);
  add_into(alternations_sq, o.alternations_sq);
  add_into(height, o.height);
  add_into(height_sq, o.height_sq);
}

double TrajectoryStats::mean_diameter() const {
  return completed ? diameter.value() / static_cast<double>(completed) : 0.0;
}

double TrajectoryStats::mean_alternations(std::size_t pair) const {
  return trials ? static_cast<double>(alternations[pair]) / static_cast<double>(trials) : 0.0;
}

double TrajectoryStats::alternation_sigma(std::size_t pair) const {
  return standard_error(static_cast<double>(alternations[pair]), static_cast<double>(alternations_sq[pair]),
                        static_cast<double>(trials));
}

double TrajectoryStats::mean_height(std::size_t k) const {
  return trials ? height[k].value() / static_cast<double>(trials) : 0.0;
}

double TrajectoryStats::height_sigma(std::size_t k) const {
  return standard_error(height[k].value(), height_sq[k].value(), static_cast<double>(trials));
}

double interval_midpoint(const VertexInterval<double>& iv) {
  const double m = iv.w_start + iv.width / 2;
  return m - std::floor(m);
}

TrajectoryStats trajectory_limit(const Tiling<double>& t, const WalkConfig& cfg, const TrajectoryOptions& opts) {
  const PlanarGraph& g = *t.graph;
  cfg.validate(g);
  const Walker walker(g);
  const auto stop = absorbing_set(g, cfg);
  const std::size_t pairs = opts.meridian_pairs.size();

  // side[v]: bit p*2 set when the span of v meets the first meridian of pair p,
  // bit p*2+1 for the second.
  std::vector<std::uint64_t> side(g.num_vertices(), 0);
  if (pairs > 32) throw InputError("trajectory: at most 32 meridian pairs");
  auto meets = [&](const VertexInterval<double>& iv, double m) {
    if (iv.full_circle) return true;
    double off = m - iv.w_start;
    off -= std::floor(off);
    return off < iv.width;
  };
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    for (std::size_t p = 0; p < pairs; ++p) {
      if (meets(t.intervals[v], opts.meridian_pairs[p].first)) side[v] |= std::uint64_t{1} << (2 * p);
      if (meets(t.intervals[v], opts.meridian_pairs[p].second)) side[v] |= std::uint64_t{1} << (2 * p + 1);
    }
  }

  TrajectoryStats zero;
  zero.meridian_pairs = opts.meridian_pairs;
  zero.final_counts.assign(g.num_vertices(), 0);
  zero.alternations.assign(pairs, 0);
  zero.alternations_sq.assign(pairs, 0);
  for (std::int64_t c = 1; c <= cfg.step_cap; c *= 2) zero.checkpoints.push_back(c);
  zero.height.resize(zero.checkpoints.size());
  zero.height_sq.resize(zero.checkpoints.size());
  const auto& h = t.profile.h;

  return run_chunked(cfg.trials, cfg.threads, zero, [&](TrajectoryStats& s, std::int64_t first, std::int64_t last) {
    std::vector<int> last_side(pairs);
    std::vector<std::int64_t> alternations(pairs);
    for (std::int64_t trial = first; trial < last; ++trial) {
      CounterRng rng(cfg.seed, trial, kTrajectoryStream);
      std::fill(last_side.begin(), last_side.end(), -1);
      std::fill(alternations.begin(), alternations.end(), 0);
      VertexId x = cfg.start_vertex(g);
      std::int64_t steps = 0;
      std::size_t next_checkpoint = 0;
      ++s.trials;
      auto observe = [&](VertexId v) {
        for (std::size_t p = 0; p < pairs; ++p) {
          const auto bits = (side[v] >> (2 * p)) & 3u;
          if (bits != 1 && bits != 2) continue;  // on neither, or on both
          const int now = bits == 1 ? 0 : 1;
          if (last_side[p] >= 0 && last_side[p] != now) ++alternations[p];
          last_side[p] = now;
        }
      };
      observe(x);
      while (!stop[x] && steps < cfg.step_cap) {
        x = walker.step(x, rng);
        ++steps;
        observe(x);
        if (next_checkpoint < s.checkpoints.size() && steps == s.checkpoints[next_checkpoint]) {
          s.height[next_checkpoint].add(h[x]);
          s.height_sq[next_checkpoint].add(h[x] * h[x]);
          ++next_checkpoint;
        }
      }
      // An absorbed walk stays where it stopped for the remaining checkpoints.
      if (stop[x]) {
        for (; next_checkpoint < s.checkpoints.size(); ++next_checkpoint) {
          s.height[next_checkpoint].add(h[x]);
          s.height_sq[next_checkpoint].add(h[x] * h[x]);
        }
        ++s.completed;
        ++s.final_counts[x];
        s.diameter.add(t.intervals[x].full_circle ? 1.0 : t.intervals[x].width);
      } else {
        ++s.censored;
      }
      for (std::size_t p = 0; p < pairs; ++p) {
        s.alternations[p] += alternations[p];
        s.alternations_sq[p] += alternations[p] * alternations[p];
      }
    }
  });
}

double boundary_mass(const TrajectoryStats& s, const Tiling<double>& t, const ArcSet& arc) {
  if (s.completed == 0) return 0.0;
  std::int64_t inside = 0;
  for (std::size_t v = 0; v < s.final_counts.size(); ++v) {
    if (s.final_counts[v] != 0 && arc.contains(interval_midpoint(t.intervals[v]))) inside += s.final_counts[v];
  }
  return static_cast<double>(inside) / static_cast<double>(s.completed);
}

}  // namespace tiler
