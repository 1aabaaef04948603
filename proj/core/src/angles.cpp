#include "qp/angles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qp {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double wrap_angle(double phi) {
  double r = std::fmod(phi, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

double angle_distance(double a, double b) {
  const double d = wrap_angle(a - b);
  return std::min(d, kTwoPi - d);
}

AngleSet AngleSet::full() {
  AngleSet s;
  s.iv_.push_back({0.0, kTwoPi});
  return s;
}

AngleSet AngleSet::from_arcs(const std::vector<Interval>& arcs) {
  std::vector<Interval> pieces;
  for (const auto& a : arcs) {
    if (!(a.hi >= a.lo)) continue;
    if (a.hi - a.lo >= kTwoPi) return full();
    const double lo = wrap_angle(a.lo);
    const double hi = lo + (a.hi - a.lo);
    if (hi <= kTwoPi) {
      pieces.push_back({lo, hi});
    } else {
      pieces.push_back({lo, kTwoPi});
      pieces.push_back({0.0, hi - kTwoPi});
    }
  }
  std::sort(pieces.begin(), pieces.end(), [](const Interval& u, const Interval& v) { return u.lo < v.lo; });
  AngleSet s;
  for (const auto& p : pieces) {
    if (!s.iv_.empty() && p.lo <= s.iv_.back().hi)
      s.iv_.back().hi = std::max(s.iv_.back().hi, p.hi);
    else
      s.iv_.push_back(p);
  }
  return s;
}

double AngleSet::measure() const {
  double m = 0.0;
  for (const auto& i : iv_) m += i.length();
  return m;
}

bool AngleSet::contains(double phi) const {
  const double x = wrap_angle(phi);
  auto it = std::upper_bound(iv_.begin(), iv_.end(), x, [](double v, const Interval& i) { return v < i.lo; });
  if (it == iv_.begin()) return false;
  --it;
  return x <= it->hi;
}

AngleSet AngleSet::complement() const {
  AngleSet s;
  double cur = 0.0;
  for (const auto& i : iv_) {
    if (i.lo > cur) s.iv_.push_back({cur, i.lo});
    cur = std::max(cur, i.hi);
  }
  if (cur < kTwoPi) s.iv_.push_back({cur, kTwoPi});
  return s;
}

AngleSet AngleSet::unite(const AngleSet& other) const {
  std::vector<Interval> all = iv_;
  all.insert(all.end(), other.iv_.begin(), other.iv_.end());
  return from_arcs(all);
}

AngleSet AngleSet::intersect(const AngleSet& other) const {
  AngleSet s;
  std::size_t i = 0, j = 0;
  while (i < iv_.size() && j < other.iv_.size()) {
    const double lo = std::max(iv_[i].lo, other.iv_[j].lo);
    const double hi = std::min(iv_[i].hi, other.iv_[j].hi);
    if (lo < hi) s.iv_.push_back({lo, hi});
    if (iv_[i].hi < other.iv_[j].hi)
      ++i;
    else
      ++j;
  }
  return s;
}

AngleSet AngleSet::subtract(const AngleSet& other) const { return intersect(other.complement()); }

AngleSet AngleSet::shifted(double s) const {
  std::vector<Interval> arcs;
  for (const auto& i : iv_) arcs.push_back({i.lo + s, i.hi + s});
  return from_arcs(arcs);
}

double AngleSet::pi_asymmetry() const {
  const AngleSet sh = shifted(std::numbers::pi);
  return subtract(sh).measure() + sh.subtract(*this).measure();
}

}  // namespace qp
