#include "tiler/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tiler {

namespace {

enum : std::uint64_t { kSharpStream = 16, kAdeStream, kAlternationStream, kFaithStream, kTailStream };

Limit classify(double v, double eps) {
  if (v > 1.0 - eps) return Limit::kOne;
  if (v < eps) return Limit::kZero;
  return Limit::kMiddle;
}

double binomial_sigma(double p, std::int64_t n) {
  return n > 0 ? std::sqrt(std::max(0.0, p * (1 - p)) / static_cast<double>(n)) : 0.0;
}

// Walks from `start` until absorbed or capped, calling visit(v) at every vertex
// of the path (start included). Returns false for a censored walk.
template <class Visit>
bool walk_path(const Walker& walker, const std::vector<char>& stop, VertexId start, std::int64_t cap,
               CounterRng& rng, Visit&& visit) {
  VertexId x = start;
  visit(x);
  for (std::int64_t steps = 0; !stop[x]; ++steps) {
    if (steps == cap) return false;
    x = walker.step(x, rng);
    visit(x);
  }
  return true;
}

// Last K classes seen along a path.
class Window {
 public:
  Window(int k, double eps) : buf_(k, Limit::kMiddle), eps_(eps) {}
  void push(double v) {
    const Limit c = classify(v, eps_);
    if (size_ == static_cast<int>(buf_.size())) {
      count(buf_[head_], -1);
    } else {
      ++size_;
    }
    buf_[head_] = c;
    count(c, +1);
    head_ = (head_ + 1) % static_cast<int>(buf_.size());
  }
  Limit limit() const {
    if (ones_ == size_) return Limit::kOne;
    if (zeros_ == size_) return Limit::kZero;
    return Limit::kMiddle;
  }

 private:
  void count(Limit c, int d) {
    if (c == Limit::kOne) ones_ += d;
    if (c == Limit::kZero) zeros_ += d;
  }
  std::vector<Limit> buf_;
  double eps_;
  int head_ = 0, size_ = 0, ones_ = 0, zeros_ = 0;
};

std::vector<VertexId> default_probes(const PlanarGraph& g) {
  std::vector<VertexId> probes{g.root()};
  for (DartId d : g.rotation(g.root())) {
    const VertexId y = g.head(d);
    if (!g.is_sink(y) && std::find(probes.begin(), probes.end(), y) == probes.end()) probes.push_back(y);
    if (probes.size() == 3) break;
  }
  return probes;
}

double harmonic_residual(const PlanarGraph& g, const std::vector<double>& s) {
  double worst = 0.0;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (g.is_sink(v)) continue;
    double acc = 0.0, pi = 0.0;
    for (DartId d : g.rotation(v)) {
      const double c = g.edge(edge_of(d)).conductance;
      acc += c * (s[v] - s[g.head(d)]);
      pi += c;
    }
    if (pi > 0) worst = std::max(worst, std::fabs(acc) / pi);
  }
  return worst;
}

std::vector<double> solve_with_sink_data(const PlanarGraph& g, const std::vector<double>& data,
                                         const SolverOptions& opts) {
  std::vector<VertexId> boundary(g.sinks().begin(), g.sinks().end());
  std::vector<double> values;
  values.reserve(boundary.size());
  for (VertexId b : boundary) values.push_back(data[b]);
  const auto sol = solve_dirichlet<double>(g, boundary, std::span<const double>(values), opts);
  return std::vector<double>(sol.values.data(), sol.values.data() + sol.values.size());
}

double coverage(const ArcSet& arc, double start, double width, bool full) {
  if (full) return arc.measure();
  if (width <= 0) return arc.contains(start) ? 1.0 : 0.0;
  return std::clamp(arc.overlap(start, width) / width, 0.0, 1.0);
}

std::span<const double> heights_of(const Tiling<double>& t) {
  return {t.profile.h.data(), static_cast<std::size_t>(t.profile.h.size())};
}

void check_same_graph(const Tiling<double>& t, const SharpFunction& s) {
  if (s.graph.get() != t.graph.get()) throw InputError("sharp function and tiling come from different graphs");
}

}  // namespace

std::vector<double> arc_coverage(const Tiling<double>& t, const ArcSet& arc) {
  std::vector<double> out(t.intervals.size());
  for (std::size_t v = 0; v < out.size(); ++v) {
    const auto& iv = t.intervals[v];
    out[v] = coverage(arc, iv.w_start, iv.width, iv.full_circle);
  }
  return out;
}

SharpFunction sharp_from_arc(const Tiling<double>& t, const ArcSet& arc, const SharpOptions& opts) {
  if (!t.graph) throw InputError("sharp_from_arc: empty tiling");
  const PlanarGraph& g = *t.graph;
  SharpFunction s;
  s.arc = arc;
  s.expression = "arc";
  s.graph = t.graph;
  s.probes = opts.probes.empty() ? default_probes(g) : opts.probes;
  for (VertexId p : s.probes) {
    if (p < 0 || p >= g.num_vertices()) throw InputError("sharp_from_arc: probe out of range");
  }

  const auto h = heights_of(t);
  std::vector<double> levels = opts.levels;
  if (levels.empty()) {
    double lowest_probe = 1.0;
    for (VertexId p : s.probes) lowest_probe = std::min(lowest_probe, h[p]);
    for (double l : dyadic_levels(t)) {
      if (l < lowest_probe) levels.push_back(l);
    }
  }

  // Dummies sit just below vertex heights, so the cut networks carry huge
  // conductances; an iterative solve stops long before the unit edges converge.
  SolverOptions cut_solver = opts.solver;
  if (cut_solver.method == SolverMethod::kAuto) cut_solver.method = SolverMethod::kDirect;
  for (double level : levels) {
    const auto cut = cut_at_level<double>(g, h, level);
    const InducedSubgraph up = cut.upper();
    std::vector<double> data(up.graph.num_vertices(), 0.0);
    for (VertexId b : up.graph.sinks()) {
      const auto i = static_cast<std::size_t>(up.to_parent[b] - g.num_vertices());
      const auto& r = t.rects[cut.cut_edge[i]];
      data[b] = coverage(arc, r.w_start, r.width, false);
    }
    const auto values = solve_with_sink_data(up.graph, data, cut_solver);
    std::vector<double> row;
    for (VertexId p : s.probes) {
      const VertexId q = up.from_parent[p];
      row.push_back(q == kNoVertex ? std::numeric_limits<double>::quiet_NaN() : values[q]);
    }
    s.levels.push_back(level);
    s.probe_values.push_back(std::move(row));
  }

  s.values = solve_with_sink_data(g, arc_coverage(t, arc), opts.solver);
  s.levels.push_back(0.0);
  std::vector<double> row;
  for (VertexId p : s.probes) row.push_back(s.values[p]);
  s.probe_values.push_back(std::move(row));

  if (s.probe_values.size() >= 2) {
    const auto& a = s.probe_values[s.probe_values.size() - 2];
    const auto& b = s.probe_values.back();
    for (std::size_t i = 0; i < a.size(); ++i) {
      s.gap = std::max(s.gap, std::isnan(a[i]) ? std::numeric_limits<double>::infinity() : std::fabs(a[i] - b[i]));
    }
  }
  s.converged = s.gap < opts.tolerance;
  s.harmonic_residual = harmonic_residual(g, s.values);
  return s;
}

SharpFunction combine_sharp(const Tiling<double>& t, std::span<const SharpFunction> parts, SharpOp op,
                            const SharpOptions& opts) {
  if (parts.empty()) throw InputError("combine_sharp: no parts");
  for (const auto& p : parts) check_same_graph(t, p);
  if (op == SharpOp::kComplement) {
    if (parts.size() != 1) throw InputError("combine_sharp: complement takes one part");
    SharpFunction c = parts[0];
    c.arc = parts[0].arc.complement();
    c.expression = "complement(" + parts[0].expression + ")";
    for (double& v : c.values) v = 1.0 - v;
    for (auto& row : c.probe_values) {
      for (double& v : row) v = 1.0 - v;
    }
    return c;
  }
  ArcSet arc = parts[0].arc;
  std::string expr = parts[0].expression;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    arc = op == SharpOp::kUnion ? arc.unite(parts[i].arc) : arc.intersect(parts[i].arc);
    expr += ", " + parts[i].expression;
  }
  SharpOptions o = opts;
  if (o.probes.empty()) o.probes = parts[0].probes;
  SharpFunction s = sharp_from_arc(t, arc, o);
  s.expression = (op == SharpOp::kUnion ? "union(" : "intersection(") + expr + ")";
  return s;
}

namespace {

struct Tally {
  std::int64_t completed = 0, mismatches = 0;
  void merge(const Tally& o) {
    completed += o.completed;
    mismatches += o.mismatches;
  }
};

}  // namespace

double tail_event_mismatch(std::span<const SharpFunction> parts, const SharpFunction& combined, SharpOp op,
                           const WalkConfig& cfg, const ProxyOptions& proxy) {
  const PlanarGraph& g = *combined.graph;
  for (const auto& p : parts) {
    if (p.graph.get() != &g) throw InputError("tail_event_mismatch: parts live on different graphs");
  }
  cfg.validate(g);
  const Walker walker(g);
  const auto stop = absorbing_set(g, cfg);
  const VertexId start = cfg.start_vertex(g);
  auto one = [&](const SharpFunction& s, VertexId v) { return classify(s.values[v], proxy.epsilon) == Limit::kOne; };
  const Tally t = run_chunked(cfg.trials, cfg.threads, Tally{}, [&](Tally& r, std::int64_t first, std::int64_t last) {
    for (std::int64_t trial = first; trial < last; ++trial) {
      CounterRng rng(cfg.seed, trial, kTailStream);
      VertexId end = kNoVertex;
      if (!walk_path(walker, stop, start, cfg.step_cap, rng, [&](VertexId v) { end = v; })) continue;
      bool expect = op == SharpOp::kIntersection;
      for (const auto& p : parts) {
        if (op == SharpOp::kUnion) expect = expect || one(p, end);
        if (op == SharpOp::kIntersection) expect = expect && one(p, end);
        if (op == SharpOp::kComplement) expect = !one(p, end);
      }
      ++r.completed;
      if (expect != one(combined, end)) ++r.mismatches;
    }
  });
  return t.completed ? static_cast<double>(t.mismatches) / static_cast<double>(t.completed) : 0.0;
}

// ---------------------------------------------------------------------------

void SharpnessReport::merge(const SharpnessReport& o) {
  trials += o.trials;
  completed += o.completed;
  censored += o.censored;
  one += o.one;
  zero += o.zero;
  middle += o.middle;
  path_one += o.path_one;
  path_zero += o.path_zero;
  path_middle += o.path_middle;
}

SharpnessReport verify_sharpness(const SharpFunction& s, VertexId z, const WalkConfig& cfg, const ProxyOptions& proxy) {
  const PlanarGraph& g = *s.graph;
  WalkConfig c = cfg;
  c.start = z;
  c.validate(g);
  if (proxy.window < 1) throw InputError("verify_sharpness: window must be >= 1");
  const Walker walker(g);
  const auto stop = absorbing_set(g, c);
  SharpnessReport zero;
  zero.start = c.start_vertex(g);
  zero.value = s.values[zero.start];
  zero.max_middle = proxy.max_middle;
  return run_chunked(c.trials, c.threads, zero, [&](SharpnessReport& r, std::int64_t first, std::int64_t last) {
    for (std::int64_t trial = first; trial < last; ++trial) {
      CounterRng rng(c.seed, trial, kSharpStream);
      Window window(proxy.window, proxy.epsilon);
      VertexId end = kNoVertex;
      ++r.trials;
      const bool done = walk_path(walker, stop, zero.start, c.step_cap, rng, [&](VertexId v) {
        window.push(s.values[v]);
        end = v;
      });
      if (!done) {
        ++r.censored;
        continue;
      }
      ++r.completed;
      switch (classify(s.values[end], proxy.epsilon)) {
        case Limit::kOne: ++r.one; break;
        case Limit::kZero: ++r.zero; break;
        case Limit::kMiddle: ++r.middle; break;
      }
      switch (window.limit()) {
        case Limit::kOne: ++r.path_one; break;
        case Limit::kZero: ++r.path_zero; break;
        case Limit::kMiddle: ++r.path_middle; break;
      }
    }
  });
}

// ---------------------------------------------------------------------------

void AdeReport::merge(const AdeReport& o) {
  trials += o.trials;
  completed += o.completed;
  censored += o.censored;
  visits += o.visits;
}

double AdeReport::sigma() const { return binomial_sigma(rate(), completed); }

std::vector<AdeReport> ade_check(const SharpFunction& s, const WalkConfig& cfg, double epsilon, double delta) {
  if (!(epsilon > 0 && epsilon <= 0.5 && delta > 0 && delta <= 0.5)) {
    throw InputError("ade_check: epsilon and delta must lie in (0, 1/2]");
  }
  const PlanarGraph& g = *s.graph;
  std::vector<AdeReport> out;
  for (bool upper : {true, false}) {
    VertexId start = kNoVertex;
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
      if (g.is_sink(v)) continue;
      const double x = s.values[v];
      if (upper && x > 1 - epsilon && (start == kNoVertex || x < s.values[start])) start = v;
      if (!upper && x < epsilon && (start == kNoVertex || x > s.values[start])) start = v;
    }
    if (start == kNoVertex) continue;
    WalkConfig c = cfg;
    c.start = start;
    c.validate(g);
    const Walker walker(g);
    const auto stop = absorbing_set(g, c);
    AdeReport zero;
    zero.upper = upper;
    zero.epsilon = epsilon;
    zero.delta = delta;
    zero.start = start;
    zero.start_value = s.values[start];
    out.push_back(run_chunked(c.trials, c.threads, zero, [&](AdeReport& r, std::int64_t first, std::int64_t last) {
      for (std::int64_t trial = first; trial < last; ++trial) {
        CounterRng rng(c.seed, trial, kAdeStream);
        bool left = false;
        ++r.trials;
        const bool done = walk_path(walker, stop, start, c.step_cap, rng, [&](VertexId v) {
          const double x = s.values[v];
          if (upper ? x <= 1 - delta : x >= delta) left = true;
        });
        if (!done && !left) {
          ++r.censored;
          continue;
        }
        ++r.completed;
        if (left) ++r.visits;
      }
    }));
  }
  return out;
}

void AlternationReport::merge(const AlternationReport& o) {
  trials += o.trials;
  completed += o.completed;
  censored += o.censored;
  for (std::size_t k = 0; k < at_least.size(); ++k) at_least[k] += o.at_least[k];
}

double AlternationReport::rate(int k) const {
  return completed ? static_cast<double>(at_least[k - 1]) / static_cast<double>(completed) : 0.0;
}

double AlternationReport::sigma(int k) const { return binomial_sigma(rate(k), completed); }

double AlternationReport::envelope(int k) const { return std::pow(2 * r, k); }

bool AlternationReport::passed() const {
  if (completed == 0) return false;
  for (int k = 1; k <= static_cast<int>(at_least.size()); ++k) {
    if (rate(k) > envelope(k) + 3 * sigma(k)) return false;
  }
  return true;
}

AlternationReport noalter_check(const SharpFunction& s, const WalkConfig& cfg, double r, int max_k) {
  if (!(r > 0 && r < 0.5)) throw InputError("noalter_check: r must lie in (0, 1/2)");
  const PlanarGraph& g = *s.graph;
  cfg.validate(g);
  const Walker walker(g);
  const auto stop = absorbing_set(g, cfg);
  AlternationReport zero;
  zero.r = r;
  zero.at_least.assign(max_k, 0);
  const VertexId start = cfg.start_vertex(g);
  return run_chunked(cfg.trials, cfg.threads, zero, [&](AlternationReport& rep, std::int64_t first, std::int64_t last) {
    for (std::int64_t trial = first; trial < last; ++trial) {
      CounterRng rng(cfg.seed, trial, kAlternationStream);
      int side = -1, alternations = 0;
      ++rep.trials;
      const bool done = walk_path(walker, stop, start, cfg.step_cap, rng, [&](VertexId v) {
        const double x = s.values[v];
        const int now = x > 1 - r ? 1 : (x < r ? 0 : -1);
        if (now < 0) return;
        if (side >= 0 && now != side) ++alternations;
        side = now;
      });
      if (!done) {
        ++rep.censored;
        continue;
      }
      ++rep.completed;
      for (int k = 1; k <= max_k && k <= alternations; ++k) ++rep.at_least[k - 1];
    }
  });
}

bool has_vertex_above(const SharpFunction& s, double threshold) {
  for (VertexId v = 0; v < s.graph->num_vertices(); ++v) {
    if (!s.graph->is_sink(v) && s.values[v] > threshold) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------

std::vector<double> dyadic_levels(const Tiling<double>& t, int max_levels) {
  const PlanarGraph& g = *t.graph;
  const auto h = heights_of(t);
  double lowest = 1.0;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (!g.is_sink(v)) lowest = std::min(lowest, h[v]);
  }
  std::vector<double> levels;
  for (int k = 1; k <= max_levels; ++k) {
    const double l = std::ldexp(1.0, -k);
    if (l <= lowest + 1e-9) break;
    levels.push_back(nudge_level(h, l));
  }
  return levels;
}

LevelSetDrift level_set_drift(const SharpFunction& s, const Tiling<double>& t, std::span<const double> levels,
                              double slack) {
  check_same_graph(t, s);
  const PlanarGraph& g = *t.graph;
  const auto h = heights_of(t);
  LevelSetDrift out;
  for (std::size_t n = 0; n < levels.size(); ++n) {
    const auto cut = cut_at_level<double>(g, h, levels[n]);
    LevelClassification c;
    c.level = levels[n];
    const double eps = std::ldexp(1.0, -static_cast<int>(n + 1));
    std::vector<ArcSet::Piece> up, down;
    for (std::size_t i = 0; i < cut.boundary.size(); ++i) {
      const Edge& e = g.edge(cut.cut_edge[i]);
      const double tp = cut.cut_parameter[i];
      const double v = s.values[e.u] * (1 - tp) + s.values[e.v] * tp;
      const auto& r = t.rects[cut.cut_edge[i]];
      c.value.push_back(v);
      c.start.push_back(r.w_start);
      c.width.push_back(r.width);
      const ArcSet span = ArcSet::arc(r.w_start, r.w_start + r.width);
      auto& target = v > SharpFunction::kThreshold ? up : down;
      if (v != SharpFunction::kThreshold) target.insert(target.end(), span.pieces().begin(), span.pieces().end());
      if (v > SharpFunction::kThreshold && v <= 1 - eps) c.f_minus_x += r.width;
    }
    c.upper = ArcSet::from_pieces(std::move(up));
    c.lower = ArcSet::from_pieces(std::move(down));
    out.levels.push_back(std::move(c));
  }
  for (std::size_t n = 1; n < out.levels.size(); ++n) {
    const auto& a = out.levels[n - 1];
    const auto& b = out.levels[n];
    DriftStep step;
    step.m = static_cast<int>(n - 1);
    step.n = static_cast<int>(n);
    step.symmetric_difference = a.upper.unite(b.upper).minus(a.upper.intersect(b.upper)).measure();
    for (std::size_t i = 0; i < b.value.size(); ++i) {
      const double v = b.value[i];
      if (v == SharpFunction::kThreshold) continue;
      const ArcSet& other = v > SharpFunction::kThreshold ? a.lower : a.upper;
      if (other.overlap(b.start[i], b.width[i]) > 1e-12) step.impurity += b.width[i];
    }
    out.steps.push_back(step);
  }
  for (std::size_t m = 0; m + 1 < out.levels.size(); ++m) {
    const ArcSet& a = out.levels[m].upper;
    const ArcSet& b = out.levels.back().upper;
    out.to_deepest.push_back(a.unite(b).minus(a.intersect(b)).measure());
  }
  out.sufficient = out.steps.size() >= 1;
  out.terminal = out.steps.empty() ? 0.0 : out.steps.back().symmetric_difference;
  out.monotone = true;
  for (std::size_t i = 1; i < out.to_deepest.size(); ++i) {
    if (out.to_deepest[i] > out.to_deepest[i - 1] + slack) out.monotone = false;
  }
  return out;
}

// ---------------------------------------------------------------------------

void FaithfulnessReport::merge(const FaithfulnessReport& o) {
  trials += o.trials;
  completed += o.completed;
  censored += o.censored;
  mismatches += o.mismatches;
}

double FaithfulnessReport::sigma() const { return binomial_sigma(rate(), completed); }

FaithfulnessReport faithfulness_audit(const SharpFunction& s, const Tiling<double>& t, const LevelSetDrift& drift,
                                      const WalkConfig& cfg, const ProxyOptions& proxy) {
  check_same_graph(t, s);
  if (drift.levels.empty()) throw InputError("faithfulness_audit: no levels");
  const PlanarGraph& g = *t.graph;
  cfg.validate(g);
  ArcSet x = ArcSet::full();
  for (std::size_t i = drift.levels.size() / 2; i < drift.levels.size(); ++i) x = x.intersect(drift.levels[i].upper);
  std::vector<char> in_x(g.num_vertices());
  for (VertexId v = 0; v < g.num_vertices(); ++v) in_x[v] = x.contains(interval_midpoint(t.intervals[v]));

  const Walker walker(g);
  const auto stop = absorbing_set(g, cfg);
  FaithfulnessReport zero;
  zero.estimate = x;
  const VertexId start = cfg.start_vertex(g);
  return run_chunked(cfg.trials, cfg.threads, zero, [&](FaithfulnessReport& r, std::int64_t first, std::int64_t last) {
    for (std::int64_t trial = first; trial < last; ++trial) {
      CounterRng rng(cfg.seed, trial, kFaithStream);
      VertexId end = kNoVertex;
      ++r.trials;
      if (!walk_path(walker, stop, start, cfg.step_cap, rng, [&](VertexId v) { end = v; })) {
        ++r.censored;
        continue;
      }
      ++r.completed;
      const bool one = classify(s.values[end], proxy.epsilon) == Limit::kOne;
      if (one != (in_x[end] != 0)) ++r.mismatches;
    }
  });
}

// ---------------------------------------------------------------------------

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::kPass: return "pass";
    case CheckStatus::kFail: return "fail";
    case CheckStatus::kInsufficient: return "insufficient levels";
  }
  return "?";
}

bool LayeredReport::passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const CriterionCheck& c) { return c.status == CheckStatus::kPass; });
}

LevelExit level_exit(const Tiling<double>& t, double level, const WalkConfig& cfg) {
  const PlanarGraph& g = *t.graph;
  const auto h = heights_of(t);
  LevelExit out{level, cut_at_level<double>(g, h, nudge_level(h, level)), {}, {}};
  for (EdgeId e : out.cut.cut_edge) out.widths.push_back(t.rects[e].width);
  WalkConfig c = cfg;
  c.kill = KillRule::kLevelSet;
  c.level_set.assign(out.cut.graph.num_vertices(), 0);
  for (VertexId b : out.cut.boundary) c.level_set[b] = 1;
  out.stats = exit_distribution(out.cut.graph, out.cut.boundary, c);
  out.stats.compare(out.widths);
  return out;
}

LayeredReport layered_criterion(const Tiling<double>& t, std::span<const SharpFunction> sharp,
                                std::span<const double> levels, const WalkConfig& cfg, const LayeredOptions& opts) {
  LayeredReport rep;
  {
    const TrajectoryStats traj = trajectory_limit(t, cfg);
    CriterionCheck c{"trajectory convergence", CheckStatus::kFail, traj.mean_diameter(), opts.diameter_tolerance, {}};
    const double censor = traj.trials ? static_cast<double>(traj.censored) / static_cast<double>(traj.trials) : 0.0;
    c.detail = "mean final interval diameter; censor rate " + std::to_string(censor);
    if (traj.completed > 0 && c.value < c.tolerance && censor <= cfg.max_censor_rate) c.status = CheckStatus::kPass;
    rep.checks.push_back(std::move(c));
  }
  for (double level : levels) {
    const LevelExit le = level_exit(t, level, cfg);
    double sum = 0.0;
    for (double w : le.widths) sum += w;
    CriterionCheck c{"exit law at level " + std::to_string(level), CheckStatus::kFail, le.stats.tv,
                     le.stats.tv_bound, {}};
    c.detail = "TV of exit law vs widths; width sum " + std::to_string(sum);
    if (le.stats.passed(cfg.max_censor_rate) && std::fabs(sum - 1.0) <= opts.band_tolerance && le.stats.missed == 0) {
      c.status = CheckStatus::kPass;
    }
    rep.checks.push_back(std::move(c));
  }
  for (const SharpFunction& s : sharp) {
    CriterionCheck c{"drift of " + s.expression, CheckStatus::kInsufficient, 0.0, opts.drift_tolerance, {}};
    if (levels.size() < 2) {
      c.detail = "insufficient levels";
    } else {
      const LevelSetDrift d = level_set_drift(s, t, levels);
      c.value = d.terminal;
      c.status = d.terminal < opts.drift_tolerance ? CheckStatus::kPass : CheckStatus::kFail;
      c.detail = d.monotone ? "non-increasing" : "not monotone";
    }
    rep.checks.push_back(std::move(c));
  }
  return rep;
}

}  // namespace tiler
