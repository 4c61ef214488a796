#include "tiler/harmonic.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_map>

namespace tiler {

namespace {

// Symmetric positive definite system stored by rows of off-diagonal entries.
template <TilerScalar S>
struct SparseSystem {
  std::vector<std::unordered_map<int, S>> offdiag;
  std::vector<S> diag;
  std::vector<S> rhs;
};

// Gaussian elimination in greedy minimum-degree order, then back substitution.
// Exact for Rational; for double it is the direct cross-check of the CG path.
template <TilerScalar S>
std::vector<S> eliminate(SparseSystem<S> sys) {
  const int m = static_cast<int>(sys.diag.size());
  struct Pivot {
    int index;
    std::vector<std::pair<int, S>> row;
  };
  std::vector<Pivot> order;
  order.reserve(m);
  std::vector<char> done(m, 0);
  using Entry = std::pair<std::size_t, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (int i = 0; i < m; ++i) queue.emplace(sys.offdiag[i].size(), i);

  while (!queue.empty()) {
    const auto [deg, k] = queue.top();
    queue.pop();
    if (done[k] || deg != sys.offdiag[k].size()) continue;
    done[k] = 1;
    const S dk = sys.diag[k];
    if (dk == 0) throw SolverError("singular system: zero pivot during elimination");
    std::vector<std::pair<int, S>> row(sys.offdiag[k].begin(), sys.offdiag[k].end());
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [i, aik] : row) sys.offdiag[i].erase(k);
    for (const auto& [i, aik] : row) {
      const S factor = aik / dk;
      sys.diag[i] -= factor * aik;
      sys.rhs[i] -= factor * sys.rhs[k];
      for (const auto& [j, ajk] : row) {
        if (j == i) continue;
        S& aij = sys.offdiag[i][j];
        aij -= factor * ajk;
        if (aij == 0) sys.offdiag[i].erase(j);
      }
    }
    for (const auto& [i, aik] : row) queue.emplace(sys.offdiag[i].size(), i);
    order.push_back(Pivot{k, std::move(row)});
  }

  std::vector<S> x(m, S(0));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    S acc = sys.rhs[it->index];
    for (const auto& [j, akj] : it->row) acc -= akj * x[j];
    x[it->index] = acc / sys.diag[it->index];
  }
  return x;
}

}  // namespace

template <TilerScalar S>
Vec<S> edge_conductances(const PlanarGraph& g) {
  Vec<S> c(g.num_edges());
  for (EdgeId e = 0; e < g.num_edges(); ++e) c[e] = g.conductance<S>(e);
  return c;
}

template <TilerScalar S>
DirichletSolution<S> solve_dirichlet(const PlanarGraph& g, std::span<const VertexId> boundary,
                                     std::span<const S> values, const SolverOptions& opts) {
  const int n = g.num_vertices();
  if (boundary.empty()) throw InputError("solve_dirichlet: boundary set is empty");
  if (boundary.size() != values.size()) throw InputError("solve_dirichlet: one value per boundary vertex");
  if (!(opts.tolerance > 0.0)) throw InputError("solver tolerance must be positive");

  DirichletSolution<S> out;
  out.values = Vec<S>::Zero(n);
  std::vector<int> slot(n, -1);
  std::vector<char> fixed(n, 0);
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    const VertexId v = boundary[i];
    if (v < 0 || v >= n) throw InputError("solve_dirichlet: boundary vertex out of range");
    if (fixed[v] && out.values[v] != values[i]) {
      throw InputError("solve_dirichlet: conflicting values at '" + g.label(v) + "'");
    }
    fixed[v] = 1;
    out.values[v] = values[i];
  }

  // Interior vertices must reach the boundary through interior vertices.
  std::vector<char> reached(fixed.begin(), fixed.end());
  std::queue<VertexId> frontier;
  for (VertexId v = 0; v < n; ++v) {
    if (fixed[v]) frontier.push(v);
  }
  while (!frontier.empty()) {
    const VertexId x = frontier.front();
    frontier.pop();
    for (DartId d : g.rotation(x)) {
      const VertexId y = g.head(d);
      if (!reached[y]) {
        reached[y] = 1;
        frontier.push(y);
      }
    }
  }
  int m = 0;
  for (VertexId v = 0; v < n; ++v) {
    if (!reached[v]) throw SolverError("singular system: '" + g.label(v) + "' cannot reach the boundary");
    if (!fixed[v]) slot[v] = m++;
  }
  if (m == 0) return out;

  const Vec<S> c = edge_conductances<S>(g);
  const bool direct = is_exact_v<S> || opts.method == SolverMethod::kDirect;

  if (direct) {
    SparseSystem<S> sys;
    sys.offdiag.resize(m);
    sys.diag.assign(m, S(0));
    sys.rhs.assign(m, S(0));
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      const VertexId u = g.edge(e).u;
      const VertexId v = g.edge(e).v;
      if (u == v) continue;
      const S& ce = c[e];
      if (slot[u] >= 0) sys.diag[slot[u]] += ce;
      if (slot[v] >= 0) sys.diag[slot[v]] += ce;
      if (slot[u] >= 0 && slot[v] >= 0) {
        sys.offdiag[slot[u]][slot[v]] -= ce;
        sys.offdiag[slot[v]][slot[u]] -= ce;
      } else if (slot[u] >= 0) {
        sys.rhs[slot[u]] += ce * out.values[v];
      } else if (slot[v] >= 0) {
        sys.rhs[slot[v]] += ce * out.values[u];
      }
    }
    const std::vector<S> x = eliminate(std::move(sys));
    for (VertexId v = 0; v < n; ++v) {
      if (slot[v] >= 0) out.values[v] = x[slot[v]];
    }
  } else if constexpr (!is_exact_v<S>) {
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      const VertexId u = g.edge(e).u;
      const VertexId v = g.edge(e).v;
      if (u == v) continue;
      const double ce = c[e];
      if (slot[u] >= 0) triplets.emplace_back(slot[u], slot[u], ce);
      if (slot[v] >= 0) triplets.emplace_back(slot[v], slot[v], ce);
      if (slot[u] >= 0 && slot[v] >= 0) {
        triplets.emplace_back(slot[u], slot[v], -ce);
        triplets.emplace_back(slot[v], slot[u], -ce);
      } else if (slot[u] >= 0) {
        b[slot[u]] += ce * out.values[v];
      } else if (slot[v] >= 0) {
        b[slot[v]] += ce * out.values[u];
      }
    }
    Eigen::SparseMatrix<double> A(m, m);
    A.setFromTriplets(triplets.begin(), triplets.end());
    if (b.norm() == 0.0) return out;
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double>>
        cg;
    cg.setTolerance(opts.tolerance);
    cg.setMaxIterations(static_cast<int>(std::max(1.0, opts.iteration_factor * n)));
    cg.compute(A);
    if (cg.info() != Eigen::Success) throw SolverError("preconditioner setup failed");
    const Eigen::VectorXd x = cg.solve(b);
    out.iterations = static_cast<int>(cg.iterations());
    out.residual = (b - A * x).norm() / b.norm();
    if (cg.info() != Eigen::Success || !(out.residual <= opts.tolerance * 10)) {
      throw SolverError("tolerance " + std::to_string(opts.tolerance) + " not met within " +
                        std::to_string(cg.maxIterations()) + " iterations (residual " +
                        std::to_string(out.residual) + ")");
    }
    for (VertexId v = 0; v < n; ++v) {
      if (slot[v] >= 0) out.values[v] = x[slot[v]];
    }
  }
  return out;
}

template <TilerScalar S>
Vec<S> compute_flow(const PlanarGraph& g, const Vec<S>& h, const Vec<S>& conductance) {
  Vec<S> flow(g.num_darts());
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edge(e);
    flow[forward_dart(e)] = conductance[e] * (h[edge.u] - h[edge.v]);
    flow[backward_dart(e)] = -flow[forward_dart(e)];
  }
  return flow;
}

template <TilerScalar S>
HarmonicProfile<S> profile_from_heights(const PlanarGraph& g, Vec<S> h, ProfileMode mode) {
  HarmonicProfile<S> p;
  p.h = std::move(h);
  p.conductance = edge_conductances<S>(g);
  p.flow = compute_flow<S>(g, p.h, p.conductance);
  p.pi = Vec<S>::Zero(g.num_vertices());
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    p.pi[g.edge(e).u] += p.conductance[e];
    p.pi[g.edge(e).v] += p.conductance[e];
  }
  p.mode = mode;
  p.eta = divergence(p, g, g.root());
  return p;
}

template <TilerScalar S>
HarmonicProfile<S> killed_profile(const PlanarGraph& g, const SolverOptions& opts) {
  std::vector<VertexId> boundary{g.root()};
  std::vector<S> values{S(1)};
  for (VertexId s : g.sinks()) {
    boundary.push_back(s);
    values.push_back(S(0));
  }
  DirichletSolution<S> sol = solve_dirichlet<S>(g, boundary, values, opts);
  HarmonicProfile<S> p = profile_from_heights<S>(g, std::move(sol.values), ProfileMode::kKilled);
  p.residual = sol.residual;
  return p;
}

template <TilerScalar S>
HarmonicProfile<S> normalize_flow(const HarmonicProfile<S>& p) {
  if (!(p.eta > 0)) throw SolverError("eta = 0: no flow escapes the root, cannot normalize");
  HarmonicProfile<S> q = p;
  const S factor = S(1) / p.eta;
  q.conductance *= factor;
  q.flow *= factor;
  q.pi *= factor;
  q.scale = p.scale * factor;
  q.eta = S(1);
  return q;
}

template <TilerScalar S>
S divergence(const HarmonicProfile<S>& p, const PlanarGraph& g, VertexId x) {
  S total = 0;
  for (DartId d : g.rotation(x)) total += p.flow[d];
  return total;
}

template <TilerScalar S>
S dirichlet_energy(const HarmonicProfile<S>& p, const PlanarGraph& g) {
  S total = 0;
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const S drop = p.h[g.edge(e).u] - p.h[g.edge(e).v];
    total += p.conductance[e] * drop * drop;
  }
  return total;
}

HarmonicProfile<double> to_double(const HarmonicProfile<Rational>& p) {
  auto convert = [](const Vec<Rational>& v) {
    Vec<double> out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[i].get_d();
    return out;
  };
  HarmonicProfile<double> q;
  q.h = convert(p.h);
  q.flow = convert(p.flow);
  q.conductance = convert(p.conductance);
  q.pi = convert(p.pi);
  q.eta = p.eta.get_d();
  q.scale = p.scale.get_d();
  q.mode = p.mode;
  q.residual = p.residual;
  return q;
}

double max_interior_divergence(const HarmonicProfile<double>& p, const PlanarGraph& g) {
  double worst = 0.0;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (v == g.root() || g.is_sink(v)) continue;
    worst = std::max(worst, std::fabs(divergence(p, g, v)));
  }
  return worst;
}

// ---------------------------------------------------------------------------

EscapeProfile escape_profile(const GraphFamily& family, const EscapeOptions& opts) {
  if (opts.start_depth < 1 || opts.max_depth < opts.start_depth) {
    throw InputError("escape_profile: need 1 <= start_depth <= max_depth");
  }
  EscapeProfile out;
  int depth = opts.start_depth;
  PlanarGraph g = family(depth);
  HarmonicProfile<double> p = killed_profile<double>(g, opts.solver);
  out.probes = opts.probes;
  if (out.probes.empty()) {
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
      if (!g.is_sink(v)) out.probes.push_back(g.label(v));
    }
  }
  auto probe_values = [&](const PlanarGraph& graph, const HarmonicProfile<double>& prof) {
    std::vector<double> vals;
    for (const auto& label : out.probes) {
      auto v = graph.find_vertex(label);
      if (!v) throw InputError("escape_profile: probe '" + label + "' missing at some depth");
      vals.push_back(prof.h[*v]);
    }
    return vals;
  };
  std::vector<double> prev = probe_values(g, p);
  out.depths.push_back(depth);
  while (2 * depth <= opts.max_depth) {
    depth *= 2;
    PlanarGraph next = family(depth);
    HarmonicProfile<double> q = killed_profile<double>(next, opts.solver);
    std::vector<double> cur = probe_values(next, q);
    double gap = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) gap = std::max(gap, std::fabs(cur[i] - prev[i]));
    out.depths.push_back(depth);
    out.gaps.push_back(gap);
    g = std::move(next);
    p = std::move(q);
    prev = std::move(cur);
    if (gap < opts.tolerance) {
      out.transient = true;
      break;
    }
  }
  out.gap = out.gaps.empty() ? std::numeric_limits<double>::infinity() : out.gaps.back();
  p.mode = ProfileMode::kExhaustion;
  out.graph = std::move(g);
  out.profile = std::move(p);
  return out;
}

EscapeProfile escape_profile(const PlanarGraph& g, const SolverOptions& opts) {
  EscapeProfile out;
  out.graph = g;
  out.profile = killed_profile<double>(g, opts);
  out.transient = true;
  return out;
}

#define TILER_HARMONIC_INSTANTIATE(S)                                                                \
  template DirichletSolution<S> solve_dirichlet<S>(const PlanarGraph&, std::span<const VertexId>,    \
                                                   std::span<const S>, const SolverOptions&);        \
  template Vec<S> edge_conductances<S>(const PlanarGraph&);                                           \
  template Vec<S> compute_flow<S>(const PlanarGraph&, const Vec<S>&, const Vec<S>&);                  \
  template HarmonicProfile<S> profile_from_heights<S>(const PlanarGraph&, Vec<S>, ProfileMode);       \
  template HarmonicProfile<S> killed_profile<S>(const PlanarGraph&, const SolverOptions&);            \
  template HarmonicProfile<S> normalize_flow<S>(const HarmonicProfile<S>&);                           \
  template S divergence<S>(const HarmonicProfile<S>&, const PlanarGraph&, VertexId);                  \
  template S dirichlet_energy<S>(const HarmonicProfile<S>&, const PlanarGraph&);

TILER_HARMONIC_INSTANTIATE(double)
TILER_HARMONIC_INSTANTIATE(Rational)

}  // namespace tiler
