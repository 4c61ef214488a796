#pragma once

#include <utility>
#include <vector>

namespace tiler {

/// Finite union of half-open arcs [a, b) of the circle R/Z. Stored as sorted,
/// disjoint, non-adjacent pieces inside [0, 1); an arc across 0 is two pieces.
class ArcSet {
 public:
  using Piece = std::pair<double, double>;

  ArcSet() = default;

  static ArcSet full() { return from_pieces({{0.0, 1.0}}); }

  /// [a, b) read counterclockwise; a == b is empty, b - a >= 1 is the circle.
  static ArcSet arc(double a, double b);

  static ArcSet from_pieces(std::vector<Piece> pieces);

  const std::vector<Piece>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }
  bool is_full() const { return pieces_.size() == 1 && pieces_[0].first == 0.0 && pieces_[0].second == 1.0; }

  double measure() const;
  bool contains(double x) const;

  /// Length of the intersection with the arc [start, start + length).
  double overlap(double start, double length) const;

  /// Endpoints of the set as a subset of the circle (0 is not an endpoint of
  /// a piece that wraps around it).
  std::vector<double> endpoints() const;

  ArcSet complement() const;
  ArcSet unite(const ArcSet& other) const;
  ArcSet intersect(const ArcSet& other) const;
  ArcSet minus(const ArcSet& other) const { return intersect(other.complement()); }

  bool operator==(const ArcSet&) const = default;

 private:
  std::vector<Piece> pieces_;
};

}  // namespace tiler
