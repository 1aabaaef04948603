#pragma once

#include <vector>

namespace qp {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

double wrap_angle(double phi);           // into [0, 2 pi)
double angle_distance(double a, double b);  // circular distance

// Finite union of closed arcs of the circle, stored as disjoint sorted intervals of [0, 2 pi).
class AngleSet {
 public:
  AngleSet() = default;
  static AngleSet full();
  // Arcs may extend outside [0, 2 pi); they are wrapped and merged.
  static AngleSet from_arcs(const std::vector<Interval>& arcs);

  const std::vector<Interval>& intervals() const { return iv_; }
  bool empty() const { return iv_.empty(); }
  double measure() const;
  bool contains(double phi) const;

  AngleSet complement() const;
  AngleSet unite(const AngleSet& other) const;
  AngleSet intersect(const AngleSet& other) const;
  AngleSet subtract(const AngleSet& other) const;
  AngleSet shifted(double s) const;
  // Measure of the symmetric difference with the set shifted by pi.
  double pi_asymmetry() const;

 private:
  std::vector<Interval> iv_;
};

}  // namespace qp
