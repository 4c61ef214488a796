#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "tiler/scalar.hpp"

namespace tiler {

using VertexId = int;
using EdgeId = int;
using DartId = int;

inline constexpr VertexId kNoVertex = -1;

// Edge e owns darts 2e (u -> v) and 2e + 1 (v -> u).
constexpr DartId forward_dart(EdgeId e) { return 2 * e; }
constexpr DartId backward_dart(EdgeId e) { return 2 * e + 1; }
constexpr EdgeId edge_of(DartId d) { return d >> 1; }
constexpr DartId reverse(DartId d) { return d ^ 1; }

/// Malformed graph descriptions, bad parameters and schema mismatches.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class GraphKind { kFiniteWithSinks, kExhaustionLevel };

/// Where a dummy vertex sits: on original edge `edge` at parameter `t`
/// measured from the edge's u endpoint.
struct VertexOrigin {
  EdgeId edge = -1;
  double t = 0.0;
};

/// The sub-range [t0, t1] of an original edge that a (possibly split) edge covers.
struct EdgeOrigin {
  EdgeId edge = -1;
  double t0 = 0.0;
  double t1 = 1.0;
};

struct Edge {
  VertexId u = kNoVertex;
  VertexId v = kNoVertex;
  double conductance = 1.0;
  std::string id;
};

/// Rotation system: darts identified by index, cyclic counterclockwise order per vertex.
struct Embedding {
  int num_vertices = 0;
  std::vector<VertexId> tail;                 // per dart
  std::vector<std::vector<DartId>> rotation;  // per vertex
  std::vector<int> position;                  // index of each dart inside its tail's rotation

  VertexId head(DartId d) const { return tail[reverse(d)]; }
  int num_darts() const { return static_cast<int>(tail.size()); }
  void rebuild_positions();

  // The face on the left of d continues with the dart leaving head(d) that
  // precedes reverse(d) in the counterclockwise rotation at head(d).
  DartId face_successor(DartId d) const;
};

class GraphBuilder;

/// Rooted, conductance-weighted graph with a planar rotation system.
/// Immutable once built; all invariants are checked by GraphBuilder::build().
class PlanarGraph {
 public:
  int num_vertices() const { return embedding_.num_vertices; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_darts() const { return 2 * num_edges(); }

  const Edge& edge(EdgeId e) const { return edges_[e]; }
  std::span<const Edge> edges() const { return edges_; }
  VertexId tail(DartId d) const { return embedding_.tail[d]; }
  VertexId head(DartId d) const { return embedding_.head(d); }
  std::span<const DartId> rotation(VertexId v) const { return embedding_.rotation[v]; }
  int degree(VertexId v) const { return static_cast<int>(embedding_.rotation[v].size()); }
  const Embedding& embedding() const { return embedding_; }

  VertexId root() const { return root_; }
  std::span<const VertexId> sinks() const { return sinks_; }
  bool is_sink(VertexId v) const { return sink_mask_[v] != 0; }
  GraphKind kind() const { return kind_; }

  const std::string& label(VertexId v) const { return labels_[v]; }
  std::optional<VertexId> find_vertex(const std::string& label) const;
  std::optional<EdgeId> find_edge(const std::string& id) const;

  const std::optional<VertexOrigin>& vertex_origin(VertexId v) const { return vertex_origin_[v]; }
  const EdgeOrigin& edge_origin(EdgeId e) const { return edge_origin_[e]; }

  /// Exact conductance; differs from the double field only on edges produced by subdivision.
  Rational exact_conductance(EdgeId e) const;
  template <TilerScalar S>
  S conductance(EdgeId e) const {
    if constexpr (is_exact_v<S>) {
      return exact_conductance(e);
    } else {
      return edges_[e].conductance;
    }
  }

  /// pi_x: total conductance at x.
  double pi(VertexId v) const;

 private:
  friend class GraphBuilder;
  Embedding embedding_;
  std::vector<Edge> edges_;
  std::vector<std::string> labels_;
  std::vector<std::optional<VertexOrigin>> vertex_origin_;
  std::vector<EdgeOrigin> edge_origin_;
  std::unordered_map<EdgeId, Rational> exact_overrides_;
  std::unordered_map<std::string, VertexId> label_index_;
  std::unordered_map<std::string, EdgeId> edge_index_;
  VertexId root_ = kNoVertex;
  std::vector<VertexId> sinks_;
  std::vector<char> sink_mask_;
  GraphKind kind_ = GraphKind::kFiniteWithSinks;
};

/// Incremental construction of a PlanarGraph. Vertices without an explicit
/// rotation get their darts in insertion order (unambiguous for degree <= 2).
class GraphBuilder {
 public:
  VertexId add_vertex(std::string label = {});
  EdgeId add_edge(VertexId u, VertexId v, double conductance, std::string id = {});
  EdgeId add_edge_exact(VertexId u, VertexId v, const Rational& conductance, std::string id = {});
  void set_rotation(VertexId v, std::vector<DartId> darts);
  void set_root(VertexId v) { root_ = v; }
  void add_sink(VertexId v) { sinks_.push_back(v); }
  void set_kind(GraphKind kind) { kind_ = kind; }
  void set_vertex_origin(VertexId v, VertexOrigin origin);
  void set_edge_origin(EdgeId e, EdgeOrigin origin);

  int num_vertices() const { return static_cast<int>(labels_.size()); }

  PlanarGraph build() &&;

 private:
  std::vector<std::string> labels_;
  std::vector<Edge> edges_;
  std::unordered_map<EdgeId, Rational> exact_;
  std::vector<std::optional<std::vector<DartId>>> rotation_;
  std::vector<std::optional<VertexOrigin>> vertex_origin_;
  std::vector<std::optional<EdgeOrigin>> edge_origin_;
  VertexId root_ = kNoVertex;
  std::vector<VertexId> sinks_;
  GraphKind kind_ = GraphKind::kFiniteWithSinks;
};

// ---------------------------------------------------------------------------
// Faces and duality

struct Faces {
  std::vector<int> face_of;                 // per dart: the face on its left
  std::vector<std::vector<DartId>> cycles;  // darts of each face in traversal order
  int count() const { return static_cast<int>(cycles.size()); }
};

Faces trace_faces(const Embedding& embedding);
inline Faces trace_faces(const PlanarGraph& g) { return trace_faces(g.embedding()); }

/// V - E + F over the vertices that carry at least one dart.
int euler_characteristic(const Embedding& embedding, const Faces& faces);

/// Dual graph. Dual darts share indices with primal darts: the dual of dart d
/// runs from the face on the left of d to the face on its right, i.e. it
/// crosses d from left to right.
struct DualGraph {
  int num_vertices = 0;
  std::vector<int> dart_tail;  // per dart
  int zeta = 0;                // reference dual vertex

  int tail(DartId d) const { return dart_tail[d]; }
  int head(DartId d) const { return dart_tail[reverse(d)]; }
  std::vector<int> degrees() const;
};

DualGraph build_dual(const Embedding& embedding, const Faces& faces, VertexId root);
DualGraph build_dual(const PlanarGraph& g);

/// The dual as a rotation system in its own right (face cycles become rotations).
Embedding dual_embedding(const DualGraph& dual, const Faces& faces);

// ---------------------------------------------------------------------------
// Structural operations

/// Splits edge e at parameter t (from its u end); resistances t/c and (1-t)/c.
/// Edge e keeps its index for the u-side half; the v-side half is appended.
PlanarGraph subdivide_edge(const PlanarGraph& g, EdgeId e, const Rational& t);
PlanarGraph subdivide_edge(const PlanarGraph& g, EdgeId e, double t);

/// Subgraph induced on `keep` (must be connected), with the inherited rotation.
struct InducedSubgraph {
  PlanarGraph graph;
  std::vector<VertexId> to_parent;     // subgraph vertex -> parent vertex
  std::vector<VertexId> from_parent;   // parent vertex -> subgraph vertex or kNoVertex
  std::vector<EdgeId> edge_to_parent;  // subgraph edge -> parent edge
};

InducedSubgraph induced_subgraph(const PlanarGraph& g, std::span<const char> keep, VertexId root,
                                 std::span<const VertexId> sinks_in_parent);

/// A level cut: every edge crossing the level is subdivided at the crossing point.
template <TilerScalar S>
struct LevelCut {
  S level;
  PlanarGraph graph;                 // the full graph with dummy vertices inserted
  std::vector<S> heights;            // heights on `graph`, exact level on dummies
  std::vector<VertexId> boundary;    // B: vertices of `graph` at the level
  std::vector<char> upper_mask;      // h >= level
  std::vector<char> lower_mask;      // h <= level
  std::vector<EdgeId> cut_edge;      // for each boundary vertex, the original edge it lies on
  std::vector<S> cut_parameter;      // ... and its parameter from that edge's u end

  /// Upper part as a killed network rooted at o with the boundary as sinks.
  InducedSubgraph upper() const;
};

template <TilerScalar S>
LevelCut<S> cut_at_level(const PlanarGraph& g, std::span<const S> heights, const S& level);

/// Moves `level` off any vertex height by the smallest step that clears them.
double nudge_level(std::span<const double> heights, double level);

extern template struct LevelCut<double>;
extern template struct LevelCut<Rational>;
extern template LevelCut<double> cut_at_level<double>(const PlanarGraph&, std::span<const double>,
                                                      const double&);
extern template LevelCut<Rational> cut_at_level<Rational>(const PlanarGraph&,
                                                          std::span<const Rational>,
                                                          const Rational&);

}  // namespace tiler
