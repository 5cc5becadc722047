#include "fillab/core.hpp"

#include "fillab/normal_form.hpp"

#include <cmath>

namespace fillab {

SmoothField::SmoothField(Evaluator f, JacobianEvaluator jac)
    : eval_(std::move(f)), jac_(std::move(jac)) {}

SmoothField SmoothField::polynomial(const PolyField3& table) {
  SmoothField f;
  f.poly_ = table;
  // Precompute the nine derivative polynomials once.
  std::array<std::array<Poly3, 3>, 3> d;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) d[r][c] = table.component(r).derivative(c);
  const PolyField3 tab = table;
  f.eval_ = [tab](const Vec3& p) { return tab.eval(p); };
  f.jac_ = [d](const Vec3& p) {
    Mat3 J;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) J(r, c) = d[r][c].eval(p);
    return J;
  };
  return f;
}

const char* to_string(Region r) {
  switch (r) {
    case Region::Crossing: return "Crossing";
    case Region::Sliding: return "Sliding";
    case Region::Escaping: return "Escaping";
    case Region::TangencyX: return "TangencyX";
    case Region::TangencyY: return "TangencyY";
    case Region::DoubleTangency: return "DoubleTangency";
  }
  return "?";
}

const char* to_string(Tangency t) {
  switch (t) {
    case Tangency::Regular: return "Regular";
    case Tangency::FoldVisible: return "FoldVisible";
    case Tangency::FoldInvisible: return "FoldInvisible";
    case Tangency::Cusp: return "Cusp";
    case Tangency::FoldFoldVV: return "FoldFoldVV";
    case Tangency::FoldFoldVI: return "FoldFoldVI";
    case Tangency::FoldFoldIV: return "FoldFoldIV";
    case Tangency::TSingularity: return "TSingularity";
    case Tangency::CuspFold: return "CuspFold";
    case Tangency::FoldCusp: return "FoldCusp";
    case Tangency::Degenerate: return "Degenerate";
  }
  return "?";
}

namespace {

// Lie derivative scalar g_k with g_1 = F_z, g_{k+1} = <grad g_k, F>, for
// fields without a polynomial table. Orders above 3 are not offered.
double lie_numeric(const SmoothField& field, const Vec3& p, int order) {
  switch (order) {
    case 1:
      return field(p).z();
    case 2: {
      // grad(Ff) = J^T e3 for f = z, so X^2 f = (row 3 of J) . F.
      return field.jacobian(p).row(2).dot(field(p));
    }
    case 3: {
      // Directional derivative of g2 along F with one central difference.
      const Vec3 v = field(p);
      const double scale = 1.0 + p.norm() + v.norm();
      const double h = std::cbrt(2.2e-16) * scale;
      auto g2 = [&](const Vec3& q) {
        return field.jacobian(q).row(2).dot(field(q));
      };
      const Vec3 dir = v.norm() > 0 ? Vec3(v / v.norm()) : Vec3(1, 0, 0);
      return (g2(p + h * dir) - g2(p - h * dir)) / (2 * h) * v.norm();
    }
    default:
      throw OrderUnsupported(
          "lie_derivative: order > 3 requires a polynomial field");
  }
}

Poly3 lie_poly_scalar(const PolyField3& table, int order) {
  Poly3 g = Poly3::variable(2);  // f = z
  for (int k = 0; k < order; ++k) g = table.lie(g);
  return g;
}

double tangency_tol(const SmoothField& field, const Vec3& p, const CoreTol& tol) {
  return tol.tangency_rel * (1.0 + field(p).norm());
}

struct Contact {
  // 0 = transverse, 1 = fold, 2 = cusp, 3 = degenerate through order 3
  int order;
  bool visible = false;
  double l1 = 0, l2 = 0, l3 = 0;
};

Contact contact_of(const SmoothField& field, FieldSide side, const Vec3& p,
                   const CoreTol& tol) {
  Contact c;
  const double tt = tangency_tol(field, p, tol);
  c.l1 = lie_derivative(field, p, 1);
  if (std::abs(c.l1) >= tt) {
    c.order = 0;
    return c;
  }
  c.l2 = lie_derivative(field, p, 2);
  if (std::abs(c.l2) >= tt) {
    c.order = 1;
    // An above-side orbit stays in z >= 0 near a fold iff z curves up.
    c.visible = (side == FieldSide::Above) ? (c.l2 > 0) : (c.l2 < 0);
    return c;
  }
  c.l3 = lie_derivative(field, p, 3);
  c.order = (std::abs(c.l3) >= tt) ? 2 : 3;
  return c;
}

Mat3 cusp_determinant_rows(const SmoothField& field, const Vec3& p) {
  // Rows: grad f = e3, grad Xf, grad X^2 f (full 3D gradients).
  Mat3 M;
  M.row(0) = Vec3(0, 0, 1);
  if (field.poly()) {
    for (int k = 1; k <= 2; ++k) {
      Poly3 g = lie_poly_scalar(*field.poly(), k);
      M.row(k) = Vec3(g.derivative(0).eval(p), g.derivative(1).eval(p),
                      g.derivative(2).eval(p));
    }
  } else {
    const double h = std::sqrt(2.2e-16) * (1.0 + p.norm());
    for (int k = 1; k <= 2; ++k) {
      for (int ax = 0; ax < 3; ++ax) {
        Vec3 e = Vec3::Zero();
        e[ax] = h;
        M(k, ax) = (lie_derivative(field, p + e, k) -
                    lie_derivative(field, p - e, k)) /
                   (2 * h);
      }
    }
  }
  return M;
}

}  // namespace

double lie_derivative(const SmoothField& field, const Vec3& p, int order) {
  if (order < 1) throw OrderUnsupported("lie_derivative: order must be >= 1");
  if (field.poly()) return lie_poly_scalar(*field.poly(), order).eval(p);
  return lie_numeric(field, p, order);
}

Vec2 lie_gradient_sigma(const SmoothField& field, const Vec3& p, int order,
                        const CoreTol&) {
  if (field.poly()) {
    Poly3 g = lie_poly_scalar(*field.poly(), order);
    return {g.derivative(0).eval(p), g.derivative(1).eval(p)};
  }
  const double h = std::sqrt(2.2e-16) * (1.0 + p.norm());
  Vec2 grad;
  for (int ax = 0; ax < 2; ++ax) {
    Vec3 e = Vec3::Zero();
    e[ax] = h;
    grad[ax] =
        (lie_derivative(field, p + e, order) - lie_derivative(field, p - e, order)) /
        (2 * h);
  }
  return grad;
}

Region classify_region(const FilippovSystem& sys, const Vec3& p,
                       const CoreTol& tol) {
  if (std::abs(p.z()) >= tol.on_sigma)
    throw NotOnSigma("classify_region: |f(p)| = " + std::to_string(std::abs(p.z())));
  const double xf = lie_derivative(sys.above, p, 1);
  const double yf = lie_derivative(sys.below, p, 1);
  const bool tx = std::abs(xf) < tangency_tol(sys.above, p, tol);
  const bool ty = std::abs(yf) < tangency_tol(sys.below, p, tol);
  if (tx && ty) return Region::DoubleTangency;
  if (tx) return Region::TangencyX;
  if (ty) return Region::TangencyY;
  if (xf * yf > 0) return Region::Crossing;
  if (xf < 0 && yf > 0) return Region::Sliding;
  return Region::Escaping;
}

SlidingVector sliding_field(const FilippovSystem& sys, const Vec3& p,
                            bool normalized, const CoreTol& tol) {
  if (std::abs(p.z()) >= tol.on_sigma)
    throw NotOnSigma("sliding_field: point is off Sigma");
  const double xf = lie_derivative(sys.above, p, 1);
  const double yf = lie_derivative(sys.below, p, 1);
  const Vec3 fn = yf * sys.above(p) - xf * sys.below(p);
  if (normalized) return {fn, true};
  const Region r = classify_region(sys, p, tol);
  if (r == Region::Crossing)
    throw NotSlidingRegion("sliding_field: point lies in the crossing region");
  const double den = yf - xf;
  if (std::abs(den) < tol.tangency_rel * (1 + std::abs(xf) + std::abs(yf)))
    throw DenominatorVanishes("sliding_field: Yf - Xf vanishes");
  return {fn / den, false};
}

TangencyInfo classify_tangency(const FilippovSystem& sys, const Vec3& p,
                               const CoreTol& tol) {
  if (std::abs(p.z()) >= tol.on_sigma)
    throw NotOnSigma("classify_tangency: point is off Sigma");
  const Contact cx = contact_of(sys.above, FieldSide::Above, p, tol);
  const Contact cy = contact_of(sys.below, FieldSide::Below, p, tol);

  TangencyInfo info;
  info.xf = cx.l1;
  info.yf = cy.l1;
  info.x2f = cx.l2;
  info.y2f = cy.l2;

  auto is_cusp = [&](const SmoothField& f) {
    const double det = cusp_determinant_rows(f, p).determinant();
    return std::abs(det) > tol.transversal;
  };
  auto transversal = [&] {
    const Vec2 nx = lie_gradient_sigma(sys.above, p, 1, tol);
    const Vec2 ny = lie_gradient_sigma(sys.below, p, 1, tol);
    return std::abs(nx.x() * ny.y() - nx.y() * ny.x()) > tol.transversal;
  };

  if (cx.order == 0 && cy.order == 0) {
    info.tag = Tangency::Regular;
    return info;
  }

  if (cx.order > 0 && cy.order == 0) {
    info.side = FieldSide::Above;
    if (cx.order == 1)
      info.tag = cx.visible ? Tangency::FoldVisible : Tangency::FoldInvisible;
    else if (cx.order == 2 && is_cusp(sys.above))
      info.tag = Tangency::Cusp;
    else
      info.tag = Tangency::Degenerate;
    return info;
  }
  if (cy.order > 0 && cx.order == 0) {
    info.side = FieldSide::Below;
    if (cy.order == 1)
      info.tag = cy.visible ? Tangency::FoldVisible : Tangency::FoldInvisible;
    else if (cy.order == 2 && is_cusp(sys.below))
      info.tag = Tangency::Cusp;
    else
      info.tag = Tangency::Degenerate;
    return info;
  }

  // Double tangency.
  info.transversal = transversal();
  if (cx.order == 1 && cy.order == 1) {
    if (cx.visible && cy.visible) info.tag = Tangency::FoldFoldVV;
    else if (cx.visible && !cy.visible) info.tag = Tangency::FoldFoldVI;
    else if (!cx.visible && cy.visible) info.tag = Tangency::FoldFoldIV;
    else info.tag = Tangency::TSingularity;
    return info;
  }
  if (cx.order == 2 && cy.order == 1 && is_cusp(sys.above)) {
    info.tag = Tangency::CuspFold;
    return info;
  }
  if (cx.order == 1 && cy.order == 2 && is_cusp(sys.below)) {
    info.tag = Tangency::FoldCusp;
    return info;
  }
  info.tag = Tangency::Degenerate;
  return info;
}

CuspFoldDegree cuspfold_degree(const FilippovSystem& sys, const Vec3& p,
                               const NormalFormSystem* nf, const CoreTol& tol) {
  const TangencyInfo info = classify_tangency(sys, p, tol);
  if (info.tag != Tangency::CuspFold ||
      !((info.y2f > 0)))  // invisible fold of Y required
    return {CuspFoldDegreeKind::NotCuspFold, 0.0, 0.0};

  // YXf(p) = <grad(Xf), Y(p)>.
  double yxf;
  if (sys.above.poly()) {
    Poly3 xf = sys.above.poly()->lie(Poly3::variable(2));
    const Vec3 grad(xf.derivative(0).eval(p), xf.derivative(1).eval(p),
                    xf.derivative(2).eval(p));
    yxf = grad.dot(sys.below(p));
  } else {
    const Vec3 grad = sys.above.jacobian(p).row(2);
    yxf = grad.dot(sys.below(p));
  }

  const double scale =
      (1 + sys.above(p).norm()) * (1 + sys.below(p).norm());
  if (std::abs(yxf) > tol.tangency_rel * scale) {
    return {info.transversal ? CuspFoldDegreeKind::Degree1
                             : CuspFoldDegreeKind::NotCuspFold,
            0.0, yxf};
  }
  if (!nf)
    throw RequiresNormalForm(
        "cuspfold_degree: index L0 needs a normal-form coefficient table");
  return {CuspFoldDegreeKind::Degree2, nf->index_L(), yxf};
}

namespace {
SmoothField conjugate_flip_z(const SmoothField& f, double sign_field) {
  if (f.poly()) {
    // Substitute z -> -z and negate the z-component, then scale.
    PolyField3 t;
    auto flip = [&](const Poly3& p, double s) {
      Poly3 r;
      for (const auto& term : p.terms())
        r.add(term.i, term.j, term.k,
              s * term.c * ((term.k % 2) ? -1.0 : 1.0));
      return r;
    };
    const PolyField3& src = *f.poly();
    t.x = flip(src.x, sign_field);
    t.y = flip(src.y, sign_field);
    t.z = flip(src.z, -sign_field);
    return SmoothField::polynomial(t);
  }
  auto ev = [f, sign_field](const Vec3& p) {
    Vec3 v = f(Vec3(p.x(), p.y(), -p.z()));
    return Vec3(sign_field * v.x(), sign_field * v.y(), -sign_field * v.z());
  };
  auto ja = [f, sign_field](const Vec3& p) {
    Mat3 J = f.jacobian(Vec3(p.x(), p.y(), -p.z()));
    Mat3 S = Mat3::Identity();
    S(2, 2) = -1;
    return Mat3(sign_field * S * J * S);
  };
  return SmoothField(ev, ja);
}

SmoothField negate_field(const SmoothField& f) {
  if (f.poly()) {
    const PolyField3& src = *f.poly();
    PolyField3 t;
    t.x = src.x * -1.0;
    t.y = src.y * -1.0;
    t.z = src.z * -1.0;
    return SmoothField::polynomial(t);
  }
  auto ev = [f](const Vec3& p) { return Vec3(-f(p)); };
  auto ja = [f](const Vec3& p) { return Mat3(-f.jacobian(p)); };
  return SmoothField(ev, ja);
}
}  // namespace

FilippovSystem swap_sides(const FilippovSystem& sys) {
  return {conjugate_flip_z(sys.below, 1.0), conjugate_flip_z(sys.above, 1.0)};
}

FilippovSystem time_reverse(const FilippovSystem& sys) {
  return {negate_field(sys.above), negate_field(sys.below)};
}

}  // namespace fillab
