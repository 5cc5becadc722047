#pragma once

#include "fillab/common.hpp"

#include <array>
#include <vector>

namespace fillab {

/// Sparse polynomial in (x, y, z), exact coefficient arithmetic on doubles.
/// Degrees are unbounded; the Lie-derivative recursion grows them as needed.
class Poly3 {
 public:
  struct Term {
    int i, j, k;
    double c;
  };

  Poly3() = default;
  static Poly3 constant(double c);
  static Poly3 variable(int axis);  // 0:x 1:y 2:z

  void add(int i, int j, int k, double c);
  bool empty() const { return terms_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }
  int max_degree() const;

  double eval(const Vec3& p) const;
  Poly3 derivative(int axis) const;

  Poly3 operator+(const Poly3& o) const;
  Poly3 operator-(const Poly3& o) const;
  Poly3 operator*(const Poly3& o) const;
  Poly3 operator*(double s) const;

 private:
  void normalize();
  std::vector<Term> terms_;  // sorted by (i,j,k), no zero coefficients
};

/// Polynomial vector field on R^3: coefficient table (i,j,k) -> (cx,cy,cz).
struct PolyField3 {
  Poly3 x, y, z;

  Vec3 eval(const Vec3& p) const;
  const Poly3& component(int axis) const;

  /// Lie derivative of a scalar polynomial along this field:
  /// sum_i F_i * dg/dx_i, exact on coefficients.
  Poly3 lie(const Poly3& g) const;
};

}  // namespace fillab
