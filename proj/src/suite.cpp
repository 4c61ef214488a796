#include "tiler/suite.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

namespace tiler {

namespace {

std::span<const double> heights_of(const Tiling<double>& t) {
  return {t.profile.h.data(), static_cast<std::size_t>(t.profile.h.size())};
}

int crossing_edges(const PlanarGraph& g, std::span<const double> h, double level) {
  int n = 0;
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const double a = h[g.edge(e).u];
    const double b = h[g.edge(e).v];
    if ((a > level && b < level) || (a < level && b > level)) ++n;
  }
  return n;
}

std::vector<double> small_levels(const Tiling<double>& t, int max_atoms) {
  std::vector<double> out;
  for (double l : dyadic_levels(t)) {
    if (crossing_edges(*t.graph, heights_of(t), l) <= max_atoms) out.push_back(l);
  }
  return out;
}

std::string fmt(const char* pattern, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

std::string arc_name(const ArcSet& a) {
  if (a.empty()) return "{}";
  std::string out;
  for (auto [lo, hi] : a.pieces()) {
    if (!out.empty()) out += "+";
    char buf[64];
    std::snprintf(buf, sizeof buf, "[%g,%g)", lo, hi);
    out += buf;
  }
  return out;
}

double binomial_sigma(double p, std::int64_t n) {
  return n > 0 ? std::sqrt(std::max(p * (1 - p), 0.0) / static_cast<double>(n)) : 0.0;
}

void add_exit_rows(Finding& f, const ExitStats& s, const PlanarGraph& g) {
  const auto p = s.distribution();
  for (std::size_t i = 0; i < s.atoms.size(); ++i) {
    f.rows.push_back({f.check.name, g.label(s.atoms[i]), p[i], i < s.expected.size() ? s.expected[i] : 0.0,
                      binomial_sigma(p[i], s.completed)});
  }
}

Finding exit_finding(std::string name, ExitStats s, const PlanarGraph& g, const Tolerances& tol,
                     std::uint64_t seed) {
  if (tol.tv > 0) s.tv_bound = tol.tv;
  const bool ok = s.passed(tol.censor) && s.missed == 0;
  std::string detail = std::to_string(s.atoms.size()) + " atoms";
  if (s.missed) detail += ", " + std::to_string(s.missed) + " walks missed the level";
  Finding f = make_finding(std::move(name), ok, s.tv, s.tv_bound, detail);
  f.seed = seed;
  f.data = to_json(s, g);
  add_exit_rows(f, s, g);
  return f;
}

double z_score(double mean, double expected, double sigma) {
  const double d = std::fabs(mean - expected);
  if (sigma > 0) return d / sigma;
  return d > 1e-12 ? std::numeric_limits<double>::infinity() : 0.0;
}

std::vector<DartId> sample_darts(const PlanarGraph& cut, const PlanarGraph& g, std::span<const double> h, int count,
                                 std::uint64_t seed) {
  std::vector<DartId> candidates;
  for (EdgeId e = 0; e < g.num_edges() && e < cut.num_edges(); ++e) {
    const VertexId u = cut.edge(e).u;
    const VertexId v = cut.edge(e).v;
    if (u >= g.num_vertices() || v >= g.num_vertices() || h[u] == h[v]) continue;
    candidates.push_back(h[u] > h[v] ? forward_dart(e) : backward_dart(e));
  }
  CounterRng rng(seed, 0, 0xd0);
  const auto n = candidates.size();
  const auto take = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(count, 0)));
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(take);
  return candidates;
}

}  // namespace

std::vector<ArcSet> default_sharp_arcs() {
  return {ArcSet::arc(0.5, 1.0), ArcSet::arc(0.0, 0.25), ArcSet::arc(0.125, 0.625)};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) { return mix64(seed ^ mix64(k + 0x5851f42d4c957f2dULL)); }

double choose_level(const Tiling<double>& t, double requested, int max_atoms) {
  if (requested > 0) {
    if (!(requested < 1)) throw InputError("level: must lie in (0, 1)");
    return nudge_level(heights_of(t), requested);
  }
  const auto levels = small_levels(t, max_atoms);
  return levels.empty() ? 0.0 : levels.back();
}

bool all_passed(const std::vector<Finding>& findings) {
  for (const auto& f : findings) {
    if (!f.passed()) return false;
  }
  return true;
}

namespace {

std::vector<Finding> audit_findings(const TilingAudit& a, const std::string& prefix) {
  std::vector<Finding> out;
  const double tol = a.tolerance;
  out.push_back(make_finding(prefix + "aspect ratio", a.aspect_ok, a.max_aspect_deviation, tol));
  out.push_back(make_finding(prefix + "total area", a.area_ok, std::fabs(a.total_area - 1), tol));
  out.push_back(make_finding(prefix + "area equals energy", a.energy_ok, std::fabs(a.total_area - a.energy), tol));
  out.push_back(make_finding(prefix + "interior overlap", a.overlap_ok, a.max_overlap, tol));
  out.push_back(make_finding(prefix + "height coverage", a.coverage_ok, std::max(a.max_gap, a.max_band_sum_error), tol,
                             std::to_string(a.bands) + " bands"));
  out.push_back(make_finding(prefix + "tangency", a.tangency_ok, a.tangency_failures, 0));
  out.push_back(make_finding(prefix + "kirchhoff", a.kirchhoff_ok, a.max_kirchhoff, tol));
  out.front().data = audit_json(a);
  return out;
}

}  // namespace

std::vector<Finding> tiling_findings(const Tiling<double>& t, const Tolerances& tol) {
  return audit_findings(audit_tiling(t, tol.geometry), "tiling ");
}

std::vector<Finding> exact_tiling_findings(const Tiling<Rational>& t) {
  return audit_findings(audit_tiling(t), "exact tiling ");
}

std::vector<Finding> walk_findings(const Tiling<double>& t, const SuiteOptions& opts) {
  const PlanarGraph& g = *t.graph;
  const auto h = heights_of(t);
  const Tolerances& tol = opts.tol;
  std::vector<Finding> out;
  WalkConfig base = opts.walk;
  base.max_censor_rate = tol.censor;
  std::uint64_t tag = 0;
  auto next = [&] {
    WalkConfig c = base;
    c.seed = derive_seed(base.seed, ++tag);
    return c;
  };

  const double level = choose_level(t, opts.level, opts.max_atoms);
  std::optional<LevelCut<double>> cut;
  std::vector<double> widths;
  if (level > 0) {
    cut = cut_at_level<double>(g, h, level);
    for (EdgeId e : cut->cut_edge) widths.push_back(t.rects[e].width);
  }
  const PlanarGraph& walk_graph = cut ? cut->graph : g;
  std::vector<VertexId> boundary = cut ? cut->boundary : std::vector<VertexId>(g.sinks().begin(), g.sinks().end());
  if (!cut) widths = interval_widths(t, boundary);
  const std::string where = cut ? fmt("level %.6g", level) : std::string("sinks");

  {
    WalkConfig c = next();
    ExitStats s;
    if (cut) {
      c.kill = KillRule::kLevelSet;
      c.level_set.assign(walk_graph.num_vertices(), 0);
      for (VertexId b : boundary) c.level_set[b] = 1;
    }
    s = exit_distribution(walk_graph, boundary, c);
    s.compare(widths);
    out.push_back(exit_finding("first hit at " + where, std::move(s), walk_graph, tol, c.seed));
  }
  {
    const WalkConfig c = next();
    ExitStats s = last_visit_distribution(walk_graph, boundary, c);
    s.compare(widths);
    out.push_back(exit_finding("last visit at " + where, std::move(s), walk_graph, tol, c.seed));
  }
  {
    const WalkConfig c = next();
    const auto darts = sample_darts(walk_graph, g, h, opts.flux_darts, c.seed);
    const VertexId root = g.root();
    const std::vector<VertexId> level_set = cut ? boundary : std::vector<VertexId>{root};
    FluxStats s = interior_subwalk_flux(walk_graph, level_set, darts, c);
    for (DartId d : darts) s.expected.push_back(t.profile.flow[d]);
    double interior = 0, total = 0;
    for (std::size_t i = 0; i < darts.size(); ++i) {
      interior = std::max(interior, z_score(s.mean(s.interior[i]), 0.0, s.sigma(s.interior[i], s.interior_sq[i])));
      total = std::max(total, z_score(s.mean(s.total[i]), s.expected[i], s.sigma(s.total[i], s.total_sq[i])));
    }
    const double censor = s.trials ? static_cast<double>(s.censored) / static_cast<double>(s.trials) : 0.0;
    Finding f = make_finding("interior subwalk flux", s.passed(tol.sigma) && censor <= tol.censor,
                             std::max(interior, total), tol.sigma,
                             std::to_string(darts.size()) + " darts, " + std::to_string(s.interior_subwalks) +
                                 " interior subwalks; z-scores interior " + fmt("%.3g", interior) + ", total " +
                                 fmt("%.3g", total));
    f.seed = c.seed;
    f.data = to_json(s, walk_graph);
    for (std::size_t i = 0; i < darts.size(); ++i) {
      const std::string key = walk_graph.label(walk_graph.tail(darts[i])) + "->" +
                              walk_graph.label(walk_graph.head(darts[i]));
      f.rows.push_back({"interior flux", key, s.mean(s.interior[i]), 0.0, s.sigma(s.interior[i], s.interior_sq[i])});
      f.rows.push_back({"total flux", key, s.mean(s.total[i]), s.expected[i], s.sigma(s.total[i], s.total_sq[i])});
    }
    out.push_back(std::move(f));
  }
  {
    CounterRng rng(derive_seed(base.seed, ++tag), 0, 0xe1);
    for (int i = 0; i < opts.meridians; ++i) {
      WalkConfig c = next();
      c.horizontal_sampling = true;
      double m = rng.uniform();
      MeridianStats s;
      for (int attempt = 0;; ++attempt) {
        try {
          s = meridian_flux(t, m, c);
          break;
        } catch (const InputError&) {
          if (attempt == 8) throw;
          m = std::fmod(m + 1e-6, 1.0);
        }
      }
      const double n = static_cast<double>(std::max<std::int64_t>(s.completed, 1));
      double z = z_score(static_cast<double>(s.net_total) / n, 0.0, s.sigma_total());
      for (std::size_t k = 0; k < s.vertices.size(); ++k) {
        z = std::max(z, z_score(static_cast<double>(s.left_to_right[k] - s.right_to_left[k]) / n, 0.0, s.sigma(k)));
      }
      const double censor = s.trials ? static_cast<double>(s.censored) / static_cast<double>(s.trials) : 0.0;
      Finding f = make_finding("meridian " + fmt("%.6f", m), s.passed(tol.sigma) && censor <= tol.censor, z,
                               tol.sigma, std::to_string(s.vertices.size()) + " spans");
      f.seed = c.seed;
      f.data = to_json(s, g);
      for (std::size_t k = 0; k < s.vertices.size(); ++k) {
        f.rows.push_back({f.check.name, g.label(s.vertices[k]),
                          static_cast<double>(s.left_to_right[k] - s.right_to_left[k]) / n, 0.0, s.sigma(k)});
      }
      out.push_back(std::move(f));
    }
  }
  {
    CounterRng rng(derive_seed(base.seed, ++tag), 0, 0xa7);
    TrajectoryOptions topts;
    for (int i = 0; i < 2; ++i) {
      const double a = rng.uniform();
      const double b = rng.uniform();
      topts.meridian_pairs.emplace_back(a, b);
    }
    std::vector<std::pair<double, double>> arcs;
    for (int i = 0; i < opts.arcs; ++i) {
      const double a = rng.uniform();
      arcs.emplace_back(a, a + 0.05 + 0.45 * rng.uniform());
    }
    WalkConfig c = next();
    c.step_cap = opts.alternation_cap;
    const TrajectoryStats shorter = trajectory_limit(t, c, topts);
    c.step_cap = 2 * opts.alternation_cap;
    const TrajectoryStats s = trajectory_limit(t, c, topts);
    const double censor = s.trials ? static_cast<double>(s.censored) / static_cast<double>(s.trials) : 0.0;

    double worst = 0;
    Finding mass = make_finding("boundary mass", true, 0, tol.arc_mass);
    for (auto [a, b] : arcs) {
      const double m = boundary_mass(s, t, ArcSet::arc(a, b));
      worst = std::max(worst, std::fabs(m - (b - a)));
      mass.rows.push_back({"boundary mass", "[" + fmt("%.6f", a) + "," + fmt("%.6f", b) + ")", m, b - a,
                           binomial_sigma(m, s.completed)});
    }
    mass.check.value = worst;
    mass.check.status = worst <= tol.arc_mass && censor <= tol.censor ? CheckStatus::kPass : CheckStatus::kFail;
    mass.check.detail = std::to_string(arcs.size()) + " arcs";
    mass.seed = c.seed;
    mass.data = to_json(s);
    out.push_back(std::move(mass));

    Finding diameter = make_finding("final interval diameter", s.mean_diameter() < tol.diameter, s.mean_diameter(),
                                    tol.diameter);
    diameter.seed = c.seed;
    out.push_back(std::move(diameter));

    double rise = 0;
    for (std::size_t k = 1; k < s.checkpoints.size(); ++k) {
      const double sigma = s.height_sigma(k);
      const double up = s.mean_height(k) - s.mean_height(k - 1);
      rise = std::max(rise, up <= 0 ? 0.0 : z_score(up, 0.0, sigma));
    }
    Finding decay = make_finding("height decay", rise <= 3.0, rise, 3.0);
    decay.seed = c.seed;
    for (std::size_t k = 0; k < s.checkpoints.size(); ++k) {
      decay.rows.push_back({"height", std::to_string(s.checkpoints[k]), s.mean_height(k), 0.0, s.height_sigma(k)});
    }
    out.push_back(std::move(decay));

    double drift = 0;
    Finding stable = make_finding("alternation stability", true, 0, 3.0);
    for (std::size_t p = 0; p < topts.meridian_pairs.size(); ++p) {
      const double sigma = std::hypot(shorter.alternation_sigma(p), s.alternation_sigma(p));
      drift = std::max(drift, z_score(shorter.mean_alternations(p), s.mean_alternations(p), sigma));
      stable.rows.push_back({"alternations", "cap " + std::to_string(opts.alternation_cap) + " pair " +
                                                 std::to_string(p),
                             shorter.mean_alternations(p), s.mean_alternations(p), sigma});
    }
    stable.check.value = drift;
    stable.check.status = drift <= 3.0 ? CheckStatus::kPass : CheckStatus::kFail;
    stable.check.detail = "step caps " + std::to_string(opts.alternation_cap) + " and " +
                          std::to_string(2 * opts.alternation_cap);
    stable.seed = c.seed;
    out.push_back(std::move(stable));
  }
  return out;
}

BoundaryRun boundary_findings(const Tiling<double>& t, const SuiteOptions& opts) {
  const PlanarGraph& g = *t.graph;
  const Tolerances& tol = opts.tol;
  BoundaryRun run;
  auto& out = run.findings;
  WalkConfig base = opts.walk;
  base.max_censor_rate = tol.censor;
  std::uint64_t tag = 1000;
  auto next = [&] {
    WalkConfig c = base;
    c.seed = derive_seed(base.seed, ++tag);
    return c;
  };
  SharpOptions so;
  so.tolerance = tol.convergence;
  so.solver.tolerance = tol.solver;
  ProxyOptions proxy;
  proxy.max_middle = tol.middle;
  const auto levels = dyadic_levels(t);

  const auto arcs = opts.sharp_arcs.empty() ? default_sharp_arcs() : opts.sharp_arcs;
  for (const ArcSet& arc : arcs) {
    SharpFunction s = sharp_from_arc(t, arc, so);
    s.expression = "arc " + arc_name(arc);
    const std::string name = "sharp " + arc_name(arc);

    out.push_back(make_finding(name + " refinement", s.converged, s.gap, tol.convergence,
                               std::to_string(s.levels.size()) + " levels"));
    for (VertexId z : s.probes) {
      const WalkConfig c = next();
      SharpnessReport r = verify_sharpness(s, z, c, proxy);
      r.tolerance = tol.sharp_value;
      Finding f = make_finding(name + " limit from " + g.label(z), r.passed(), std::fabs(r.fraction(r.one) - r.value),
                               tol.sharp_value, "middle " + fmt("%.4g", r.fraction(r.middle)));
      f.seed = c.seed;
      f.data = to_json(r, g);
      f.rows.push_back({name + " limit", g.label(z), r.fraction(r.one), r.value, binomial_sigma(r.value, r.completed)});
      out.push_back(std::move(f));
    }
    {
      const WalkConfig c = next();
      for (const AdeReport& a : ade_check(s, c)) {
        Finding f = make_finding(name + " escape from " + (a.upper ? "high" : "low") + " set", a.passed(), a.rate(),
                                 a.bound() + 3 * a.sigma());
        f.seed = c.seed;
        f.data = to_json(a, g);
        out.push_back(std::move(f));
      }
    }
    {
      const WalkConfig c = next();
      const AlternationReport a = noalter_check(s, c);
      double excess = -1;
      for (int k = 1; k <= static_cast<int>(a.at_least.size()); ++k) {
        excess = std::max(excess, a.rate(k) - a.envelope(k) - 3 * a.sigma(k));
      }
      Finding f = make_finding(name + " alternations", a.passed(), excess, 0.0, "max excess over the envelope");
      f.seed = c.seed;
      f.data = to_json(a);
      out.push_back(std::move(f));
    }
    const LevelSetDrift d = level_set_drift(s, t, levels);
    {
      Finding f = make_finding(name + " level-set drift", d.sufficient && d.monotone && d.terminal < tol.drift,
                               d.terminal, tol.drift, d.monotone ? "monotone" : "not monotone");
      if (!d.sufficient) {
        f.check.status = CheckStatus::kInsufficient;
        f.check.detail = "insufficient levels";
      }
      f.data = to_json(d);
      out.push_back(std::move(f));
    }
    {
      const WalkConfig c = next();
      FaithfulnessReport r = faithfulness_audit(s, t, d, c, proxy);
      r.tolerance = tol.faithfulness;
      Finding f = make_finding(name + " faithfulness", r.passed(), r.rate(), tol.faithfulness);
      f.seed = c.seed;
      f.data = to_json(r);
      out.push_back(std::move(f));
    }
    out.push_back(make_finding(name + " reaches 0.99", arc.empty() || has_vertex_above(s, 0.99),
                               *std::max_element(s.values.begin(), s.values.end()), 0.99));
    run.sharp.push_back(std::move(s));
  }

  if (run.sharp.size() >= 2) {
    const std::span<const SharpFunction> pair(run.sharp.data(), 2);
    const SharpFunction u = combine_sharp(t, pair, SharpOp::kUnion, so);
    const SharpFunction not_u = combine_sharp(t, std::span(&u, 1), SharpOp::kComplement, so);
    const SharpFunction comps[] = {combine_sharp(t, pair.subspan(0, 1), SharpOp::kComplement, so),
                                   combine_sharp(t, pair.subspan(1, 1), SharpOp::kComplement, so)};
    const SharpFunction both = combine_sharp(t, comps, SharpOp::kIntersection, so);
    double diff = 0;
    for (std::size_t v = 0; v < u.values.size(); ++v) diff = std::max(diff, std::fabs(not_u.values[v] - both.values[v]));
    const double value_tol = 100 * tol.solver;
    out.push_back(make_finding("de morgan", not_u.arc == both.arc && diff <= value_tol, diff, value_tol,
                               not_u.arc == both.arc ? "arcs identical" : "arcs differ"));
    const WalkConfig c = next();
    const double mismatch = tail_event_mismatch(pair, u, SharpOp::kUnion, c, proxy);
    Finding f = make_finding("union tail event", mismatch < tol.faithfulness, mismatch, tol.faithfulness);
    f.seed = c.seed;
    out.push_back(std::move(f));
  }

  {
    const WalkConfig c = next();
    const auto small = small_levels(t, opts.max_atoms);
    std::vector<double> chosen;
    if (small.size() >= 2) chosen = {small[small.size() - 2], small.back()};
    else chosen = small;
    LayeredOptions lo;
    lo.diameter_tolerance = tol.diameter;
    lo.drift_tolerance = tol.drift;
    const LayeredReport r = layered_criterion(t, run.sharp, chosen, c, lo);
    for (const auto& check : r.checks) {
      Finding f;
      f.check = check;
      f.check.name = "layered " + check.name;
      f.seed = c.seed;
      out.push_back(std::move(f));
    }
  }
  return run;
}

}  // namespace tiler
