#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "tiler/graph.hpp"

namespace tiler {

/// How the frontier of a tree truncation is terminated.
enum class TreeTail {
  kKilled,  // frontier vertices are sinks
  kGround,  // each frontier vertex gets a pendant sink carrying the exact
            // effective conductance of the subtree it replaces
};

/// Spherically symmetric tree: the root has `branching` children, every other
/// vertex has one parent and `branching` children. Labels are "o" followed by
/// the child indices along the path, e.g. "o01".
PlanarGraph bary_tree(int branching, int depth, TreeTail tail = TreeTail::kKilled,
                      double conductance = 1.0);

inline PlanarGraph binary_tree(int depth, TreeTail tail = TreeTail::kKilled) {
  return bary_tree(2, depth, tail);
}

/// Binary tree with independent conductances uniform on [low, high], drawn from
/// a counter-based stream keyed by `seed` and the edge's child label.
PlanarGraph perturbed_tree(int depth, std::uint64_t seed, double low = 0.5, double high = 2.0);

/// Vertex-centred truncation of the {p, q} tessellation to `layers` rings around
/// the root; the outermost ring is killed.
PlanarGraph hyperbolic_tessellation(int p, int q, int layers);

/// Square-lattice box [-radius, radius]^2 rooted at the origin, boundary killed.
PlanarGraph grid_box(int radius);

/// Path o - a - t with unit conductances and t killed.
PlanarGraph path_graph();

/// 4-cycle o-a-b-c with chord o-b; root o, sinks {a, c}.
PlanarGraph chord_cycle();

/// A depth-indexed family of finite exhaustions.
using GraphFamily = std::function<PlanarGraph(int depth)>;

/// Family by name: binary-tree, bary-tree, perturbed-tree, hyperbolic, grid.
struct FamilySpec {
  std::string name = "binary-tree";
  int depth = 10;
  int branching = 2;
  int p = 4;
  int q = 5;
  std::uint64_t perturb_seed = 1;
  bool ground_tail = false;
};

GraphFamily make_family(const FamilySpec& spec);
PlanarGraph build_family(const FamilySpec& spec);

}  // namespace tiler
