#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tiler/generators.hpp"
#include "tiler/walk.hpp"

using namespace tiler;

namespace {

PlanarGraph star(std::initializer_list<double> conductances) {
  GraphBuilder b;
  const VertexId o = b.add_vertex("o");
  b.set_root(o);
  int i = 0;
  for (double c : conductances) {
    const VertexId leaf = b.add_vertex("l" + std::to_string(i++));
    b.add_edge(o, leaf, c);
    b.add_sink(leaf);
  }
  return std::move(b).build();
}

std::vector<VertexId> at_depth(const PlanarGraph& g, int depth) {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (static_cast<int>(g.label(v).size()) == depth + 1 && g.label(v)[0] == 'o') out.push_back(v);
  }
  return out;
}

WalkConfig config(std::int64_t trials, std::uint64_t seed = 7) {
  WalkConfig c;
  c.trials = trials;
  c.seed = seed;
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("one step picks neighbours in proportion to conductance") {
  const int n = 1000000;
  for (const auto& [g, expect] : {std::pair{star({1, 1, 1}), std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}},
                                  std::pair{star({1, 3}), std::vector<double>{0.25, 0.75}}}) {
    std::vector<int> hits(g.num_vertices(), 0);
    CounterRng rng(11, 0);
    for (int i = 0; i < n; ++i) ++hits[sample_step(g, g.root(), rng)];
    for (std::size_t k = 0; k < expect.size(); ++k) {
      const double p = expect[k];
      const double sigma = std::sqrt(p * (1 - p) / n);
      CHECK(std::fabs(hits[k + 1] / static_cast<double>(n) - p) < 3 * sigma);
    }
  }
}

TEST_CASE("sampling is a pure function of the seed") {
  const PlanarGraph g = star({1, 2, 3});
  const Walker w(g);
  CounterRng a(5, 9), b(5, 9), c(5, 9);
  for (int i = 0; i < 1000; ++i) {
    const VertexId x = sample_step(g, g.root(), a);
    CHECK(x == sample_step(g, g.root(), b));
    CHECK(x == w.step(g.root(), c));
  }
  GraphBuilder lone;
  lone.set_root(lone.add_vertex("o"));
  const VertexId s = lone.add_vertex("s");
  lone.add_sink(s);
  lone.add_edge(0, 1, 1.0);
  const PlanarGraph h = std::move(lone).build();
  CHECK(sample_step(h, 0, a) == 1);
}

TEST_CASE("parallel runs merge to the serial statistics exactly") {
  const PlanarGraph g = binary_tree(6);
  const auto boundary = at_depth(g, 6);
  WalkConfig cfg = config(50000);
  const ExitStats serial = exit_distribution(g, boundary, cfg);
  cfg.threads = 3;
  const ExitStats parallel = exit_distribution(g, boundary, cfg);
  CHECK(serial.counts == parallel.counts);
  CHECK(serial.steps == parallel.steps);
  CHECK(serial.completed == cfg.trials);

  // Disjoint trial ranges merge like one run.
  ExitStats halves;
  halves.counts.assign(boundary.size(), 0);
  const Walker walker(g);
  auto run = [&](std::int64_t first, std::int64_t last) {
    ExitStats s;
    s.counts.assign(boundary.size(), 0);
    for (std::int64_t t = first; t < last; ++t) {
      CounterRng rng(cfg.seed, t, 1);
      VertexId x = g.root();
      while (!g.is_sink(x)) x = walker.step(x, rng);
      ++s.counts[std::find(boundary.begin(), boundary.end(), x) - boundary.begin()];
      ++s.completed;
    }
    return s;
  };
  halves.merge(run(20000, 50000));
  halves.merge(run(0, 20000));
  CHECK(halves.counts == serial.counts);

  TrajectoryStats a, b;
  a.diameter.add(0.1);
  b.diameter.add(0.2);
  TrajectoryStats ab = a, ba = b;
  ab.merge(b);
  ba.merge(a);
  CHECK(ab.diameter == ba.diameter);
}

TEST_CASE("first hits of a tree level are uniform and match the widths") {
  for (int k = 1; k <= 6; ++k) {
    const PlanarGraph g = binary_tree(k);
    const auto t = tile_killed<double>(g);
    const auto boundary = at_depth(g, k);
    ExitStats s = exit_distribution(g, boundary, config(200000, k));
    s.compare(interval_widths(t, boundary));
    for (double w : s.expected) CHECK(w == doctest::Approx(std::ldexp(1.0, -k)));
    CHECK(s.tv < s.tv_bound);
    CHECK(s.censored == 0);
  }
  const PlanarGraph p = path_graph();
  const VertexId target = *p.find_vertex("t");
  const ExitStats s = exit_distribution(p, std::span(&target, 1), config(1000));
  CHECK(s.counts[0] == 1000);
}

TEST_CASE("first hits of a level cut follow the cut widths and the sink divergence") {
  const PlanarGraph g = perturbed_tree(8, 5);
  const auto p = killed_profile<double>(g);
  const double level = nudge_level(std::span<const double>(p.h.data(), p.h.size()), 0.3);
  const auto cut = cut_at_level<double>(g, std::span<const double>(p.h.data(), p.h.size()), level);
  const auto t = tile_killed<double>(cut.graph);
  WalkConfig cfg = config(200000);
  cfg.kill = KillRule::kLevelSet;
  cfg.level_set.assign(cut.graph.num_vertices(), 0);
  for (VertexId b : cut.boundary) cfg.level_set[b] = 1;
  ExitStats s = exit_distribution(cut.graph, cut.boundary, cfg);
  s.compare(interval_widths(t, cut.boundary));
  CHECK(s.tv < s.tv_bound);
  CHECK(s.missed == 0);

  const InducedSubgraph up = cut.upper();
  const auto q = normalize_flow(killed_profile<double>(up.graph));
  for (std::size_t i = 0; i < cut.boundary.size(); ++i) {
    const VertexId b = up.from_parent[cut.boundary[i]];
    CHECK(-divergence(q, up.graph, b) == doctest::Approx(s.expected[i]).epsilon(1e-8));
  }
}

TEST_CASE("last visits to an upper level match its widths") {
  const PlanarGraph g = binary_tree(6);
  const auto quarter = at_depth(g, 2);
  const WalkConfig cfg = config(200000, 3);
  ExitStats last = last_visit_distribution(g, quarter, cfg);
  ExitStats first = exit_distribution(g, quarter, cfg);
  last.compare(std::vector<double>(4, 0.25));
  first.compare(std::vector<double>(4, 0.25));
  CHECK(last.tv < last.tv_bound);
  CHECK(total_variation(last.distribution(), first.distribution()) < 2 * last.tv_bound);
  CHECK(last.missed == 0);

  const auto leaves = at_depth(g, 6);
  const ExitStats a = last_visit_distribution(g, leaves, cfg);
  const ExitStats b = exit_distribution(g, leaves, cfg);
  CHECK(a.counts == b.counts);
}

TEST_CASE("interior subwalks carry no net flux") {
  const PlanarGraph g = binary_tree(7);
  const auto t = tile_killed<double>(g);
  const auto level = at_depth(g, 2);
  std::vector<DartId> darts;
  std::vector<double> flow;
  for (const char* child : {"o0", "o01", "o010", "o0101", "o11", "o111", "o1110"}) {
    const VertexId v = *g.find_vertex(child);
    for (DartId d : g.rotation(v)) {
      if (g.label(g.head(d)).size() < g.label(v).size()) {
        darts.push_back(reverse(d));
        flow.push_back(t.profile.flow[reverse(d)]);
      }
    }
  }
  FluxStats s = interior_subwalk_flux(g, level, darts, config(200000));
  s.expected = flow;
  CHECK(s.passed());
  CHECK(s.interior_subwalks > 0);
  for (std::size_t i = 0; i < darts.size(); ++i) {
    const int depth = static_cast<int>(g.label(g.tail(darts[i])).size()) - 1;
    CHECK(flow[i] == doctest::Approx(std::ldexp(1.0, -(depth + 1))));
  }

  const auto leaves = at_depth(g, 7);
  const FluxStats none = interior_subwalk_flux(g, leaves, darts, config(20000));
  CHECK(none.interior_subwalks == 0);
  for (auto x : none.interior) CHECK(x == 0);
}

TEST_CASE("meridian crossings balance at every span") {
  const auto t = tile_killed<double>(binary_tree(8));
  WalkConfig cfg = config(200000);
  cfg.horizontal_sampling = true;
  for (double m : {1.0 / 3, 1e-7, 0.7}) {
    const MeridianStats s = meridian_flux(t, m, cfg);
    CHECK(s.passed());
    CHECK(s.vertices.size() == 7);
    std::int64_t crossings = 0;
    for (auto c : s.left_to_right) crossings += c;
    CHECK(crossings > 0);
  }
  CHECK_THROWS_WITH_AS(meridian_flux(t, 0.5, cfg), doctest::Contains("perturb meridian"), InputError);

  const auto shallow = tile_killed<double>(binary_tree(1));
  const MeridianStats s = meridian_flux(shallow, 1.0 / 3, cfg);
  CHECK(s.vertices.empty());
  CHECK(s.net_total == 0);

  const auto h = tile_killed<double>(hyperbolic_tessellation(4, 5, 3));
  CHECK(meridian_flux(h, 0.2345, config(50000)).passed());
}

TEST_CASE("walks converge to boundary points with Lebesgue law") {
  const auto t = tile_killed<double>(binary_tree(10));
  WalkConfig cfg = config(200000);
  cfg.step_cap = 400;
  TrajectoryOptions opts;
  opts.meridian_pairs = {{0.1, 0.6}, {0.3, 0.4}};
  const TrajectoryStats s = trajectory_limit(t, cfg, opts);
  CHECK(s.mean_diameter() == doctest::Approx(std::ldexp(1.0, -10)).epsilon(1e-6));
  for (auto [a, b] : {std::pair{0.0, 0.5}, {0.5, 1.0}, {0.1, 0.35}, {0.8, 1.05}}) {
    CHECK(std::fabs(boundary_mass(s, t, ArcSet::arc(a, b)) - (b - a)) < 0.02);
  }
  for (std::size_t k = 1; k < s.checkpoints.size(); ++k) {
    CHECK(s.mean_height(k) <= s.mean_height(k - 1) + 3 * s.height_sigma(k));
  }
  cfg.step_cap = 800;
  const TrajectoryStats d = trajectory_limit(t, cfg, opts);
  for (std::size_t p = 0; p < 2; ++p) {
    const double sigma = std::hypot(s.alternation_sigma(p), d.alternation_sigma(p));
    CHECK(std::fabs(s.mean_alternations(p) - d.mean_alternations(p)) <= 3 * sigma + 1e-12);
    CHECK(s.mean_alternations(p) > 0);
  }
}

TEST_CASE("censored walks are reported, never counted") {
  const PlanarGraph g = binary_tree(8);
  WalkConfig cfg = config(10000);
  cfg.step_cap = 5;
  const auto leaves = at_depth(g, 8);
  const ExitStats s = exit_distribution(g, leaves, cfg);
  CHECK(s.censored == s.trials);
  CHECK(s.completed == 0);
  cfg.trials = 0;
  CHECK_THROWS_AS(exit_distribution(g, leaves, cfg), InputError);
}

TEST_CASE("arc algebra") {
  const ArcSet left = ArcSet::arc(0.5, 1.0);
  CHECK(left.complement() == ArcSet::arc(0.0, 0.5));
  CHECK(ArcSet::arc(0.0, 0.25).unite(ArcSet::arc(0.25, 0.5)) == ArcSet::arc(0.0, 0.5));
  CHECK(ArcSet::arc(0.0, 0.5).intersect(ArcSet::arc(0.25, 0.75)) == ArcSet::arc(0.25, 0.5));
  const ArcSet wrap = ArcSet::arc(0.75, 0.25);
  CHECK(wrap.measure() == 0.5);
  CHECK(wrap.contains(0.9));
  CHECK(wrap.contains(0.1));
  CHECK_FALSE(wrap.contains(0.5));
  CHECK(wrap.endpoints() == std::vector<double>{0.25, 0.75});
  CHECK(wrap.overlap(0.2, 0.1) == doctest::Approx(0.05));
  CHECK(ArcSet::full().complement().empty());
  const ArcSet a = ArcSet::arc(0.1, 0.4), b = ArcSet::arc(0.3, 0.9);
  CHECK(a.unite(b).complement() == a.complement().intersect(b.complement()));
  CHECK(a.intersect(b).complement() == a.complement().unite(b.complement()));
}
