#pragma once

#include <cmath>
#include <iosfwd>
#include <ostream>

namespace fillab {

/// Double-double scalar (~31 significant digits). Used where plain doubles
/// lose too many digits to cancellation, e.g. the curvature fit of the
/// polycycle parameter curve at c ~ 1e-4. Only the arithmetic the series
/// pipeline needs is provided.
struct DD {
  double hi = 0.0;
  double lo = 0.0;

  DD() = default;
  DD(double h) : hi(h), lo(0.0) {}
  DD(double h, double l) : hi(h), lo(l) {}

  explicit operator double() const { return hi + lo; }
};

namespace dd_detail {
inline DD two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}
inline DD quick_two_sum(double a, double b) {
  double s = a + b;
  return {s, b - (s - a)};
}
inline DD two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}
}  // namespace dd_detail

inline DD operator+(DD a, DD b) {
  using namespace dd_detail;
  DD s = two_sum(a.hi, b.hi);
  s.lo += a.lo + b.lo;
  return quick_two_sum(s.hi, s.lo);
}
inline DD operator-(DD a) { return {-a.hi, -a.lo}; }
inline DD operator-(DD a, DD b) { return a + (-b); }
inline DD operator*(DD a, DD b) {
  using namespace dd_detail;
  DD p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return quick_two_sum(p.hi, p.lo);
}
inline DD operator/(DD a, DD b) {
  using namespace dd_detail;
  double q1 = a.hi / b.hi;
  DD r = a - b * DD(q1);
  double q2 = r.hi / b.hi;
  r = r - b * DD(q2);
  double q3 = r.hi / b.hi;
  DD q = quick_two_sum(q1, q2);
  return q + DD(q3);
}

inline DD& operator+=(DD& a, DD b) { return a = a + b; }
inline DD& operator-=(DD& a, DD b) { return a = a - b; }
inline DD& operator*=(DD& a, DD b) { return a = a * b; }
inline DD& operator/=(DD& a, DD b) { return a = a / b; }

inline DD operator+(DD a, double b) { return a + DD(b); }
inline DD operator+(double a, DD b) { return DD(a) + b; }
inline DD operator-(DD a, double b) { return a - DD(b); }
inline DD operator-(double a, DD b) { return DD(a) - b; }
inline DD operator*(DD a, double b) { return a * DD(b); }
inline DD operator*(double a, DD b) { return DD(a) * b; }
inline DD operator/(DD a, double b) { return a / DD(b); }
inline DD operator/(double a, DD b) { return DD(a) / b; }

inline bool operator<(DD a, DD b) {
  return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo);
}
inline bool operator>(DD a, DD b) { return b < a; }
inline bool operator<=(DD a, DD b) { return !(b < a); }
inline bool operator>=(DD a, DD b) { return !(a < b); }
inline bool operator==(DD a, DD b) { return a.hi == b.hi && a.lo == b.lo; }
inline bool operator!=(DD a, DD b) { return !(a == b); }

inline DD abs(DD a) { return a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0) ? -a : a; }
inline DD sqrt(DD a) {
  if (a.hi == 0.0 && a.lo == 0.0) return DD(0.0);
  double x = std::sqrt(a.hi);
  DD x0(x);
  // One Newton step doubles the accurate digits of the double seed.
  return (x0 + a / x0) * DD(0.5);
}

inline double to_double(DD a) { return a.hi + a.lo; }
inline double to_double(double a) { return a; }

inline std::ostream& operator<<(std::ostream& os, DD a) {
  return os << to_double(a);
}

}  // namespace fillab
