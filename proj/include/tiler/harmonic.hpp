#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tiler/generators.hpp"
#include "tiler/graph.hpp"
#include "tiler/scalar.hpp"

namespace tiler {

/// Singular systems, missed tolerances and degenerate (eta = 0) profiles.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SolverMethod {
  kAuto,       // conjugate gradients for double, elimination for Rational
  kIterative,  // double only
  kDirect,     // sparse elimination with minimum-degree ordering
};

struct SolverOptions {
  double tolerance = 1e-10;       // relative residual
  double iteration_factor = 50;   // cap = factor * |V|
  SolverMethod method = SolverMethod::kAuto;
};

template <TilerScalar S>
struct DirichletSolution {
  Vec<S> values;
  double residual = 0.0;
  int iterations = 0;
};

/// Harmonic extension of boundary data: equal to `values` on `boundary` and
/// harmonic (w.r.t. the graph's conductances) everywhere else.
template <TilerScalar S>
DirichletSolution<S> solve_dirichlet(const PlanarGraph& g, std::span<const VertexId> boundary,
                                     std::span<const S> values, const SolverOptions& opts = {});

enum class ProfileMode { kKilled, kExhaustion };

/// Height, Ohm flow and bookkeeping for one solve. `conductance` and `pi` carry
/// the current normalization scale; h is scale-free.
template <TilerScalar S>
struct HarmonicProfile {
  Vec<S> h;            // per vertex
  Vec<S> flow;         // per dart
  Vec<S> conductance;  // per edge
  Vec<S> pi;           // per vertex
  S eta = 0;           // total outflow at the root
  S scale = 1;         // product of normalization factors applied so far
  ProfileMode mode = ProfileMode::kKilled;
  double residual = 0.0;
};

template <TilerScalar S>
Vec<S> edge_conductances(const PlanarGraph& g);

/// flow(x -> y) = c(xy) (h(x) - h(y)), per dart.
template <TilerScalar S>
Vec<S> compute_flow(const PlanarGraph& g, const Vec<S>& h, const Vec<S>& conductance);

template <TilerScalar S>
Vec<S> compute_flow(const PlanarGraph& g, const Vec<S>& h) {
  return compute_flow<S>(g, h, edge_conductances<S>(g));
}

/// Profile from any height function (root value 1 assumed by the callers).
template <TilerScalar S>
HarmonicProfile<S> profile_from_heights(const PlanarGraph& g, Vec<S> h, ProfileMode mode = ProfileMode::kKilled);

/// h = 1 at the root, 0 at the sinks, harmonic elsewhere.
template <TilerScalar S>
HarmonicProfile<S> killed_profile(const PlanarGraph& g, const SolverOptions& opts = {});

/// Scales conductances, flows and pi by 1/eta so that the root emits unit flow.
template <TilerScalar S>
HarmonicProfile<S> normalize_flow(const HarmonicProfile<S>& p);

/// Net outflow at x.
template <TilerScalar S>
S divergence(const HarmonicProfile<S>& p, const PlanarGraph& g, VertexId x);

/// Sum over edges of c(xy) (h(x) - h(y))^2.
template <TilerScalar S>
S dirichlet_energy(const HarmonicProfile<S>& p, const PlanarGraph& g);

HarmonicProfile<double> to_double(const HarmonicProfile<Rational>& p);

/// Largest |divergence| over vertices that are neither the root nor sinks.
double max_interior_divergence(const HarmonicProfile<double>& p, const PlanarGraph& g);

// ---------------------------------------------------------------------------
// Exhaustions

struct EscapeOptions {
  int start_depth = 4;
  int max_depth = 16;
  double tolerance = 1e-6;
  std::vector<std::string> probes;  // vertex labels; default: every vertex at start_depth
  SolverOptions solver;
};

struct EscapeProfile {
  PlanarGraph graph;  // deepest truncation solved
  HarmonicProfile<double> profile;
  std::vector<int> depths;
  std::vector<double> gaps;  // sup change over probes between consecutive depths
  double gap = 0.0;          // last entry of gaps
  bool transient = false;    // false: "transience not established"
  std::vector<std::string> probes;
};

/// Killed solves at depths start, 2 start, 4 start, ... until the probes move
/// by less than the tolerance.
EscapeProfile escape_profile(const GraphFamily& family, const EscapeOptions& opts);

/// Finite graph with sinks: a single killed solve.
EscapeProfile escape_profile(const PlanarGraph& g, const SolverOptions& opts = {});

// ---------------------------------------------------------------------------

#define TILER_HARMONIC_EXTERN(S)                                                                     \
  extern template DirichletSolution<S> solve_dirichlet<S>(const PlanarGraph&, std::span<const VertexId>, \
                                                          std::span<const S>, const SolverOptions&);   \
  extern template Vec<S> edge_conductances<S>(const PlanarGraph&);                                    \
  extern template Vec<S> compute_flow<S>(const PlanarGraph&, const Vec<S>&, const Vec<S>&);           \
  extern template HarmonicProfile<S> profile_from_heights<S>(const PlanarGraph&, Vec<S>, ProfileMode); \
  extern template HarmonicProfile<S> killed_profile<S>(const PlanarGraph&, const SolverOptions&);     \
  extern template HarmonicProfile<S> normalize_flow<S>(const HarmonicProfile<S>&);                    \
  extern template S divergence<S>(const HarmonicProfile<S>&, const PlanarGraph&, VertexId);           \
  extern template S dirichlet_energy<S>(const HarmonicProfile<S>&, const PlanarGraph&);

TILER_HARMONIC_EXTERN(double)
TILER_HARMONIC_EXTERN(Rational)
#undef TILER_HARMONIC_EXTERN

}  // namespace tiler
