#include "tiler/arcs.hpp"

#include <algorithm>
#include <cmath>

namespace tiler {

namespace {

double wrap01(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

}  // namespace

ArcSet ArcSet::arc(double a, double b) {
  if (a == b) return {};
  if (b - a >= 1.0) return full();
  const double start = wrap01(a);
  double length = b - a;
  if (length < 0) length = wrap01(length);
  const double end = start + length;
  if (end <= 1.0) return from_pieces({{start, end}});
  return from_pieces({{start, 1.0}, {0.0, end - 1.0}});
}

ArcSet ArcSet::from_pieces(std::vector<Piece> pieces) {
  std::erase_if(pieces, [](const Piece& p) { return !(p.first < p.second); });
  for (auto& p : pieces) {
    p.first = std::clamp(p.first, 0.0, 1.0);
    p.second = std::clamp(p.second, 0.0, 1.0);
  }
  std::sort(pieces.begin(), pieces.end());
  ArcSet out;
  for (const Piece& p : pieces) {
    if (!(p.first < p.second)) continue;
    if (!out.pieces_.empty() && p.first <= out.pieces_.back().second) {
      out.pieces_.back().second = std::max(out.pieces_.back().second, p.second);
    } else {
      out.pieces_.push_back(p);
    }
  }
  return out;
}

double ArcSet::measure() const {
  double total = 0.0;
  for (const auto& [a, b] : pieces_) total += b - a;
  return total;
}

bool ArcSet::contains(double x) const {
  x = wrap01(x);
  for (const auto& [a, b] : pieces_) {
    if (a <= x && x < b) return true;
  }
  return false;
}

double ArcSet::overlap(double start, double length) const {
  if (length >= 1.0) return measure();
  if (length <= 0.0) return 0.0;
  const ArcSet window = arc(start, start + length);
  return intersect(window).measure();
}

std::vector<double> ArcSet::endpoints() const {
  if (is_full()) return {};
  std::vector<double> out;
  const bool wraps = !pieces_.empty() && pieces_.front().first == 0.0 && pieces_.back().second == 1.0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (!(wraps && i == 0)) out.push_back(pieces_[i].first);
    if (!(wraps && i + 1 == pieces_.size())) out.push_back(pieces_[i].second);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ArcSet ArcSet::complement() const {
  std::vector<Piece> gaps;
  double cursor = 0.0;
  for (const auto& [a, b] : pieces_) {
    if (cursor < a) gaps.emplace_back(cursor, a);
    cursor = b;
  }
  if (cursor < 1.0) gaps.emplace_back(cursor, 1.0);
  return from_pieces(std::move(gaps));
}

ArcSet ArcSet::unite(const ArcSet& other) const {
  std::vector<Piece> all = pieces_;
  all.insert(all.end(), other.pieces_.begin(), other.pieces_.end());
  return from_pieces(std::move(all));
}

ArcSet ArcSet::intersect(const ArcSet& other) const {
  std::vector<Piece> out;
  std::size_t i = 0, j = 0;
  while (i < pieces_.size() && j < other.pieces_.size()) {
    const double lo = std::max(pieces_[i].first, other.pieces_[j].first);
    const double hi = std::min(pieces_[i].second, other.pieces_[j].second);
    if (lo < hi) out.emplace_back(lo, hi);
    if (pieces_[i].second < other.pieces_[j].second) {
      ++i;
    } else {
      ++j;
    }
  }
  return from_pieces(std::move(out));
}

}  // namespace tiler
