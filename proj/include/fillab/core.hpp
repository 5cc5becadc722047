#pragma once

#include "fillab/common.hpp"
#include "fillab/poly.hpp"

#include <functional>
#include <optional>
#include <string>

namespace fillab {

/// A smooth vector field given by an evaluator plus analytic Jacobian.
/// Fields built from a polynomial table additionally support exact Lie
/// derivatives of any order.
class SmoothField {
 public:
  using Evaluator = std::function<Vec3(const Vec3&)>;
  using JacobianEvaluator = std::function<Mat3(const Vec3&)>;

  SmoothField(Evaluator f, JacobianEvaluator jac);
  static SmoothField polynomial(const PolyField3& table);

  Vec3 operator()(const Vec3& p) const { return eval_(p); }
  Mat3 jacobian(const Vec3& p) const { return jac_(p); }
  const std::optional<PolyField3>& poly() const { return poly_; }

 private:
  SmoothField() = default;
  Evaluator eval_;
  JacobianEvaluator jac_;
  std::optional<PolyField3> poly_;
};

/// Filippov system Z = (X, Y) with switching function f(x,y,z) = z.
/// X acts on z > 0, Y on z < 0. The switching abstraction is kept narrow on
/// purpose: all systems in scope use the canonical plane.
struct FilippovSystem {
  SmoothField above;
  SmoothField below;

  const SmoothField& field(FieldSide s) const {
    return s == FieldSide::Above ? above : below;
  }
};

struct CoreTol {
  double on_sigma = 1e-9;       // |f(p)| below this counts as "on Sigma"
  double tangency_rel = 1e-9;   // |Xf| < tangency_rel * (1 + |X(p)|)
  double transversal = 1e-8;    // 2D cross-product threshold for S_X -|- S_Y
};

enum class Region {
  Crossing,
  Sliding,
  Escaping,
  TangencyX,
  TangencyY,
  DoubleTangency,
};

enum class Tangency {
  Regular,
  FoldVisible,
  FoldInvisible,
  Cusp,
  FoldFoldVV,    // both folds visible
  FoldFoldVI,    // X visible, Y invisible
  FoldFoldIV,    // X invisible, Y visible
  TSingularity,  // both invisible
  CuspFold,      // cusp of X, fold of Y
  FoldCusp,      // fold of X, cusp of Y
  Degenerate,
};

const char* to_string(Region r);
const char* to_string(Tangency t);

struct TangencyInfo {
  Tangency tag = Tangency::Regular;
  FieldSide side = FieldSide::Above;  // tangent field for single tangencies
  bool transversal = false;           // S_X -|- S_Y, double tangencies only
  // Per-field contact data, useful to callers deciding continuations.
  double xf = 0, yf = 0, x2f = 0, y2f = 0;
};

struct SlidingVector {
  Vec3 value;
  bool normalized;
};

/// k-th Lie derivative of f = z along `field` at p. Exact coefficient
/// recursion for polynomial fields (any order); analytic Jacobians plus one
/// central difference otherwise, capped at order 3.
double lie_derivative(const SmoothField& field, const Vec3& p, int order);

/// In-plane gradient (d/dx, d/dy) of the order-k Lie derivative at p, the
/// normal of the corresponding tangency set inside Sigma.
Vec2 lie_gradient_sigma(const SmoothField& field, const Vec3& p, int order,
                        const CoreTol& tol = {});

Region classify_region(const FilippovSystem& sys, const Vec3& p,
                       const CoreTol& tol = {});

SlidingVector sliding_field(const FilippovSystem& sys, const Vec3& p,
                            bool normalized, const CoreTol& tol = {});

TangencyInfo classify_tangency(const FilippovSystem& sys, const Vec3& p,
                               const CoreTol& tol = {});

enum class CuspFoldDegreeKind { Degree1, Degree2, NotCuspFold };

struct CuspFoldDegree {
  CuspFoldDegreeKind kind;
  double L0 = 0.0;  // index, Degree2 only
  double yxf = 0.0;
};

class NormalFormSystem;  // normal_form.hpp

/// Degree classification of an invisible cusp-fold singularity. The index
/// L0 of the degree-2 case needs the normal-form coefficient table.
CuspFoldDegree cuspfold_degree(const FilippovSystem& sys, const Vec3& p,
                               const NormalFormSystem* nf = nullptr,
                               const CoreTol& tol = {});

/// Swaps the two regimes through (X,Y,f) -> (Y,X,-f); conjugates by z -> -z
/// so the result is again in canonical form. Test helper for the taxonomy
/// involution.
FilippovSystem swap_sides(const FilippovSystem& sys);

/// Time reversal (X,Y) -> (-X,-Y).
FilippovSystem time_reverse(const FilippovSystem& sys);

}  // namespace fillab
