#pragma once

#include <cstdint>
#include <vector>

#include "tiler/boundary.hpp"
#include "tiler/report.hpp"
#include "tiler/tiling.hpp"
#include "tiler/walk.hpp"

namespace tiler {

struct Tolerances {
  double solver = 1e-10;       // relative residual of the harmonic solves
  double geometry = 1e-7;      // tiling audit
  double tv = 0.0;             // 0: 4 sqrt(K / N) capped at 0.02
  double sigma = 4.0;          // flux and meridian z-scores
  double arc_mass = 0.02;
  double diameter = 0.01;
  double sharp_value = 0.02;
  double middle = 0.01;
  double convergence = 1e-3;   // probe gap of the level refinement
  double drift = 0.05;
  double faithfulness = 0.02;
  double censor = 1e-3;
};

struct SuiteOptions {
  WalkConfig walk;
  Tolerances tol;
  double level = 0.0;  // 0: deepest dyadic level with at most max_atoms atoms
  int max_atoms = 64;
  int flux_darts = 10;
  int meridians = 5;
  int arcs = 8;
  std::int64_t alternation_cap = 400;
  std::vector<ArcSet> sharp_arcs;  // empty: the defaults below
};

std::vector<ArcSet> default_sharp_arcs();

/// Independent seed for the k-th randomized check of a run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k);

/// Deepest nudged dyadic level whose cut has at most `max_atoms` dummies, or
/// the nudged `requested` level when positive. Returns 0 when no level fits.
double choose_level(const Tiling<double>& t, double requested, int max_atoms);

std::vector<Finding> tiling_findings(const Tiling<double>& t, const Tolerances& tol);
std::vector<Finding> exact_tiling_findings(const Tiling<Rational>& t);

/// First hit, last visit, interior flux, meridians, boundary mass, diameter,
/// height decay and alternation stability.
std::vector<Finding> walk_findings(const Tiling<double>& t, const SuiteOptions& opts);

struct BoundaryRun {
  std::vector<SharpFunction> sharp;
  std::vector<Finding> findings;
};

/// Sharp functions of the configured arcs and their audits.
BoundaryRun boundary_findings(const Tiling<double>& t, const SuiteOptions& opts);

bool all_passed(const std::vector<Finding>& findings);

}  // namespace tiler
