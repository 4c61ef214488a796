#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "tiler/generators.hpp"
#include "tiler/harmonic.hpp"
#include "tiler/rng.hpp"

using namespace tiler;

namespace {

int tree_depth(const PlanarGraph& g, VertexId v) { return static_cast<int>(g.label(v).size()) - 1; }

// Dense transition matrix restricted to `alive`; the walk dies on leaving it.
Eigen::MatrixXd killed_transition(const PlanarGraph& g, const std::vector<char>& alive) {
  const int n = g.num_vertices();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (VertexId x = 0; x < n; ++x) {
    if (!alive[x]) continue;
    for (DartId d : g.rotation(x)) {
      const VertexId y = g.head(d);
      if (alive[y]) P(x, y) += g.edge(edge_of(d)).conductance / g.pi(x);
    }
  }
  return P;
}

// Expected visits to every vertex before leaving `alive`, for walks from every start.
Eigen::MatrixXd green_function(const PlanarGraph& g, const std::vector<char>& alive) {
  const int n = g.num_vertices();
  const Eigen::MatrixXd P = killed_transition(g, alive);
  Eigen::MatrixXd G = (Eigen::MatrixXd::Identity(n, n) - P).partialPivLu().inverse();
  for (VertexId x = 0; x < n; ++x) {
    if (!alive[x]) G.row(x).setZero();
  }
  return G;
}

std::vector<char> non_sinks(const PlanarGraph& g) {
  std::vector<char> alive(g.num_vertices(), 1);
  for (VertexId s : g.sinks()) alive[s] = 0;
  return alive;
}

std::vector<PlanarGraph> small_graphs() {
  return {path_graph(),        chord_cycle(),        binary_tree(5),
          perturbed_tree(6, 7), hyperbolic_tessellation(4, 5, 2), hyperbolic_tessellation(3, 7, 2),
          grid_box(6)};
}

}  // namespace

TEST_CASE("path: one interior vertex takes the average") {
  const PlanarGraph g = path_graph();
  const std::vector<VertexId> bnd{0, 2};
  const std::vector<double> vd{1.0, 0.0};
  CHECK(solve_dirichlet<double>(g, bnd, vd).values[1] == doctest::Approx(0.5).epsilon(1e-12));
  const std::vector<Rational> vq{1, 0};
  CHECK(solve_dirichlet<Rational>(g, bnd, vq).values[1] == Rational(1, 2));
}

TEST_CASE("truncated binary tree heights match the collapsed birth-death chain") {
  for (int D = 1; D <= 6; ++D) {
    const PlanarGraph g = binary_tree(D);
    const HarmonicProfile<Rational> p = killed_profile<Rational>(g);
    // Level d -> d+1 carries 2^{d+1} unit edges in parallel: resistance 2^{-(d+1)}.
    Rational total = 0;
    std::vector<Rational> to_level(D + 1, Rational(0));
    for (int d = 0; d < D; ++d) {
      total += Rational(1, 2u << d);
      to_level[d + 1] = total;
    }
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
      const int d = tree_depth(g, v);
      CHECK(p.h[v] == 1 - to_level[d] / total);
      Rational closed((1u << (D - d)) - 1, (1u << D) - 1);
      closed.canonicalize();
      CHECK(p.h[v] == closed);
    }
  }
}

TEST_CASE("constant boundary data extends to a constant") {
  const PlanarGraph g = hyperbolic_tessellation(4, 5, 2);
  std::vector<VertexId> bnd{g.root()};
  std::vector<double> vals{0.3};
  for (VertexId s : g.sinks()) {
    bnd.push_back(s);
    vals.push_back(0.3);
  }
  const auto sol = solve_dirichlet<double>(g, bnd, vals);
  for (VertexId v = 0; v < g.num_vertices(); ++v) CHECK(sol.values[v] == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("iterative and exact solvers agree on small graphs") {
  for (const PlanarGraph& g : small_graphs()) {
    REQUIRE(g.num_vertices() <= 200);
    const auto cg = killed_profile<double>(g);
    const auto ex = killed_profile<Rational>(g);
    SolverOptions direct;
    direct.method = SolverMethod::kDirect;
    const auto el = killed_profile<double>(g, direct);
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
      CHECK(std::fabs(cg.h[v] - ex.h[v].get_d()) < 1e-9);
      CHECK(std::fabs(el.h[v] - ex.h[v].get_d()) < 1e-12);
    }
  }
}

TEST_CASE("maximum principle under random boundary data") {
  for (const PlanarGraph& g : small_graphs()) {
    for (std::uint64_t trial = 0; trial < 5; ++trial) {
      CounterRng rng(11, trial);
      std::vector<VertexId> bnd;
      std::vector<double> vals;
      for (VertexId v = 0; v < g.num_vertices(); ++v) {
        if (v == g.root() || g.is_sink(v) || rng.uniform() < 0.1) {
          bnd.push_back(v);
          vals.push_back(rng.uniform() * 4.0 - 2.0);
        }
      }
      const double lo = *std::min_element(vals.begin(), vals.end());
      const double hi = *std::max_element(vals.begin(), vals.end());
      const auto sol = solve_dirichlet<double>(g, bnd, vals);
      for (VertexId v = 0; v < g.num_vertices(); ++v) {
        CHECK(sol.values[v] >= lo - 1e-9);
        CHECK(sol.values[v] <= hi + 1e-9);
      }
    }
  }
}

TEST_CASE("reversibility: pi_v h(v) = pi_o G(o,v) / G(o,o)") {
  for (const PlanarGraph& g : small_graphs()) {
    const auto p = killed_profile<double>(g);
    const Eigen::MatrixXd G = green_function(g, non_sinks(g));
    const VertexId o = g.root();
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
      if (g.is_sink(v)) continue;
      const double lhs = g.pi(v) * p.h[v];
      const double rhs = g.pi(o) * G(o, v) / G(o, o);
      CHECK(std::fabs(lhs - rhs) <= 1e-8 * std::max(1.0, std::fabs(rhs)));
    }
  }
}

TEST_CASE("flow follows Ohm's law and is antisymmetric") {
  const PlanarGraph g = path_graph();
  const auto p = killed_profile<double>(g);
  CHECK(p.flow[forward_dart(0)] == doctest::Approx(0.5));
  CHECK(p.flow[forward_dart(1)] == doctest::Approx(0.5));
  for (DartId d = 0; d < g.num_darts(); ++d) CHECK(p.flow[d] == -p.flow[reverse(d)]);

  const PlanarGraph t = binary_tree(8, TreeTail::kGround);
  const auto q = killed_profile<Rational>(t);
  for (EdgeId e = 0; e < t.num_edges(); ++e) {
    if (t.is_sink(t.edge(e).v)) continue;
    const int d = tree_depth(t, t.edge(e).u);
    CHECK(q.flow[forward_dart(e)] == Rational(1, 2u << d));
  }

  GraphBuilder b;
  auto x = b.add_vertex("x"), y = b.add_vertex("y"), z = b.add_vertex("z"), w = b.add_vertex("w");
  b.add_edge(x, y, 1.0);
  b.add_edge(x, z, 1.0);
  b.add_edge(y, w, 1.0);
  b.add_edge(z, w, 1.0);
  b.add_edge(y, z, 1.0, "level");
  b.set_rotation(x, {0, 2});
  b.set_rotation(y, {1, 4, 8});
  b.set_rotation(z, {9, 3, 6});
  b.set_root(x);
  b.add_sink(w);
  const PlanarGraph sym = std::move(b).build();
  CHECK(killed_profile<Rational>(sym).flow[forward_dart(4)] == 0);
}

TEST_CASE("normalization scales to unit outflow and is idempotent") {
  const PlanarGraph g = path_graph();
  const auto p = killed_profile<Rational>(g);
  CHECK(p.eta == Rational(1, 2));
  const auto n = normalize_flow(p);
  CHECK(n.conductance[0] == 2);
  CHECK(n.flow[forward_dart(0)] == 1);
  CHECK(n.eta == 1);
  CHECK(n.h == p.h);
  const auto nn = normalize_flow(n);
  CHECK(nn.conductance == n.conductance);
  CHECK(nn.flow == n.flow);

  const PlanarGraph t = binary_tree(10, TreeTail::kGround);
  const auto tp = killed_profile<Rational>(t);
  CHECK(tp.eta == 1);
  CHECK(tp.pi[t.root()] == 2);
}

TEST_CASE("normalizing a profile with no escape is a typed error") {
  GraphBuilder b;
  auto x = b.add_vertex("x"), y = b.add_vertex("y");
  b.add_edge(x, y, 1.0);
  b.set_root(x);
  const PlanarGraph g = std::move(b).build();
  const auto p = killed_profile<double>(g);
  CHECK(p.h[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(normalize_flow(p), SolverError);
}

TEST_CASE("divergence vanishes inside, is 1 at the root and minus the exit law at sinks") {
  for (const PlanarGraph& g : small_graphs()) {
    const auto p = normalize_flow(killed_profile<double>(g));
    CHECK(max_interior_divergence(p, g) < 1e-9);
    CHECK(divergence(p, g, g.root()) == doctest::Approx(1.0).epsilon(1e-9));
    // Exit law of the walk from o: absorbing only at the sinks.
    const Eigen::MatrixXd G = green_function(g, non_sinks(g));
    for (VertexId b : g.sinks()) {
      double mass = 0.0;
      for (DartId d : g.rotation(b)) {
        const VertexId y = g.head(d);
        mass += G(g.root(), y) * g.edge(edge_of(d)).conductance / g.pi(y);
      }
      CHECK(divergence(p, g, b) == doctest::Approx(-mass).epsilon(1e-9));
    }
  }
}

TEST_CASE("Dirichlet energy of a normalized killed profile is 1") {
  const PlanarGraph path = path_graph();
  const auto raw = killed_profile<Rational>(path);
  CHECK(dirichlet_energy(raw, path) == Rational(1, 2));
  CHECK(dirichlet_energy(normalize_flow(raw), path) == 1);
  for (const PlanarGraph& g : small_graphs()) {
    CHECK(dirichlet_energy(normalize_flow(killed_profile<double>(g)), g) == doctest::Approx(1.0).epsilon(1e-9));
  }
  const PlanarGraph t = binary_tree(12);
  CHECK(dirichlet_energy(normalize_flow(killed_profile<double>(t)), t) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("escape profile on a tree approaches 2^-d; on the square lattice it is flagged") {
  EscapeOptions opts;
  opts.start_depth = 4;
  opts.max_depth = 16;
  opts.probes = {"o", "o0", "o01", "o110"};
  const auto killed = escape_profile(make_family({.name = "binary-tree"}), opts);
  REQUIRE(killed.gaps.size() == 2);
  CHECK(killed.gaps[1] < killed.gaps[0]);
  const auto& g = killed.graph;
  for (const auto& label : opts.probes) {
    const VertexId v = *g.find_vertex(label);
    CHECK(std::fabs(killed.profile.h[v] - std::ldexp(1.0, -tree_depth(g, v))) < 1e-4);
  }

  FamilySpec tailed{.name = "binary-tree", .ground_tail = true};
  const auto exact = escape_profile(make_family(tailed), opts);
  CHECK(exact.transient);
  CHECK(exact.depths.size() == 2);

  EscapeOptions lattice;
  lattice.start_depth = 4;
  lattice.max_depth = 64;
  lattice.probes = {"1,0", "0,1", "2,2"};
  const auto z2 = escape_profile(make_family({.name = "grid"}), lattice);
  CHECK_FALSE(z2.transient);
  CHECK(z2.gap > 1e-3);

  const auto finite = escape_profile(chord_cycle());
  CHECK(finite.transient);
  CHECK(finite.profile.h[*chord_cycle().find_vertex("b")] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("solver reports a missed tolerance") {
  SolverOptions tight;
  tight.tolerance = 1e-16;
  tight.iteration_factor = 1e-9;
  CHECK_THROWS_AS(killed_profile<double>(grid_box(10), tight), SolverError);
}
