#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace subsum {

// Closed interval [lo, hi] over doubles. Every arithmetic operation rounds
// outward by one ulp, so an interval computed from enclosing inputs encloses
// the exact result.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval exact(double v) { return {v, v}; }
  static Interval zero() { return {0.0, 0.0}; }

  double mid() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
  // sup |x| over the interval
  double mag() const { return std::max(std::fabs(lo), std::fabs(hi)); }
  // inf |x| over the interval (0 if the interval straddles 0)
  double mig() const {
    if (lo > 0.0) return lo;
    if (hi < 0.0) return -hi;
    return 0.0;
  }

  bool contains(double v) const { return lo <= v && v <= hi; }
  bool inside(double a, double b) const { return a <= lo && hi <= b; }
  bool excludes_zero() const { return lo > 0.0 || hi < 0.0; }
  // +1 / -1 when the sign is certified, 0 when the interval straddles zero
  int certified_sign() const { return lo > 0.0 ? 1 : (hi < 0.0 ? -1 : 0); }
};

namespace detail {
inline double down(double x) { return std::nextafter(x, -std::numeric_limits<double>::infinity()); }
inline double up(double x) { return std::nextafter(x, std::numeric_limits<double>::infinity()); }
}  // namespace detail

inline Interval operator-(Interval a) { return {-a.hi, -a.lo}; }

inline bool is_exact_zero(Interval a) { return a.lo == 0.0 && a.hi == 0.0; }

inline Interval operator+(Interval a, Interval b) {
  if (is_exact_zero(a)) return b;
  if (is_exact_zero(b)) return a;
  return {detail::down(a.lo + b.lo), detail::up(a.hi + b.hi)};
}

inline Interval operator-(Interval a, Interval b) { return a + (-b); }

inline Interval operator*(Interval a, Interval b) {
  if (is_exact_zero(a) || is_exact_zero(b)) return Interval::zero();
  const double p1 = a.lo * b.lo;
  const double p2 = a.lo * b.hi;
  const double p3 = a.hi * b.lo;
  const double p4 = a.hi * b.hi;
  return {detail::down(std::min(std::min(p1, p2), std::min(p3, p4))),
          detail::up(std::max(std::max(p1, p2), std::max(p3, p4)))};
}

inline Interval scale(Interval a, double s) { return a * Interval::exact(s); }

// Widen symmetrically by r >= 0.
inline Interval pad(Interval a, double r) { return {detail::down(a.lo - r), detail::up(a.hi + r)}; }

// Intersection of two enclosures of the same exact value. Both are sound, so
// the intersection is nonempty and sound; used to keep refinement monotone.
inline Interval intersect(Interval a, Interval b) {
  Interval r{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
  if (r.lo > r.hi) return a.width() <= b.width() ? a : b;  // numeric slop: keep the tighter one
  return r;
}

inline Interval hull(Interval a, Interval b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

}  // namespace subsum
