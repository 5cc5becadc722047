#include "fillab/toy_model.hpp"

#include <cmath>
#include <string>

namespace fillab::toy {

FilippovSystem make_system(const ToyParams& p) {
  PolyField3 X;
  X.x.add(0, 0, 0, 1.0);
  X.y.add(1, 0, 0, 1.0);
  X.y.add(0, 0, 0, p.alpha);
  X.z.add(0, 1, 0, -1.0);
  PolyField3 Y;
  Y.x.add(0, 0, 0, -1.0);
  Y.y.add(0, 0, 0, -p.beta);
  Y.z.add(1, 0, 0, -1.0);
  Y.z.add(0, 1, 0, -p.b);
  return {SmoothField::polynomial(X), SmoothField::polynomial(Y)};
}

NormalFormSystem to_normal_form(const ToyParams& p) {
  jets::BelowCoeffs bc;
  bc.alpha = {{0, 0, 0, 1.0}};
  bc.beta = {{0, 0, 0, p.beta}};
  bc.gamma = {{1, 0, 0, 1.0}, {0, 1, 0, p.b}};
  return NormalFormSystem(p.alpha, bc);
}

Mat2 p_minus_matrix(const ToyParams& p) {
  const double d = 1.0 + p.b * p.beta;
  Mat2 m;
  m << (p.b * p.beta - 1.0) / d, -2.0 * p.b / d, -2.0 * p.beta / d,
      (1.0 - p.b * p.beta) / d;
  return m;
}

Vec2 p_minus(const ToyParams& p, double x0, double y0) {
  if (!(1.0 + p.b * p.beta > 0))
    throw OutOfRange("p_minus: needs 1 + b*beta > 0");
  if (x0 + p.b * y0 < -1e-12 * (1.0 + std::abs(x0) + std::abs(y0)))
    throw NotInCrossing("p_minus: (x0, y0) does not cross into z < 0");
  return p_minus_matrix(p) * Vec2(x0, y0);
}

Vec2 p_plus(const ToyParams& p, double t, double x1, double y1) {
  return Vec2(t + x1, 0.5 * (t * t + 2.0 * (x1 + p.alpha) * t + 2.0 * y1));
}

double flight_residual(const ToyParams& p, double t, double x1, double y1) {
  return -t * t - 3.0 * t * (x1 + p.alpha) - 6.0 * y1;
}

double alpha_of_t(const ToyParams& p, double t) {
  return p.b / 12.0 * t * t + p.beta;
}

ClcFamilyPoint clc_family(const ToyParams& p, double t) {
  if (!(p.beta > 0) || p.b == 0.0 || !p.invisible_y_folds())
    throw OutOfRange("clc_family: needs beta > 0, b != 0, 1 + b*beta > 0");
  if (!(t > 0.0) || t > 6.0 * p.beta + 1e-12)
    throw OutOfRange("clc_family: t outside (0, 6*beta]");
  ClcFamilyPoint fp;
  fp.t = t;
  fp.x1 = -t * (6.0 + p.b * t) / 12.0;
  fp.y1 = t * (t - 6.0 * p.beta) / 12.0;
  fp.x0 = t * (6.0 - p.b * t) / 12.0;
  fp.y0 = t * (t + 6.0 * p.beta) / 12.0;
  fp.alpha_of_t = alpha_of_t(p, t);

  ToyParams pa = p;
  pa.alpha = fp.alpha_of_t;
  const double scale = 1.0 + std::abs(fp.x0) + std::abs(fp.y0) + t * t;
  const Vec2 pm = p_minus(pa, fp.x0, fp.y0);
  const Vec2 pp = p_plus(pa, t, fp.x1, fp.y1);
  const double g = flight_residual(pa, t, fp.x1, fp.y1);
  if (std::abs(pm.x() - fp.x1) > 1e-12 * scale ||
      std::abs(pm.y() - fp.y1) > 1e-12 * scale ||
      std::abs(pp.x() - fp.x0) > 1e-12 * scale ||
      std::abs(pp.y() - fp.y0) > 1e-12 * scale || std::abs(g) > 1e-12 * scale)
    throw Error("FamilyInconsistency",
                "clc_family: defining equations violated at t = " +
                    std::to_string(t));
  return fp;
}

double t_of_alpha(const ToyParams& p, double alpha) {
  if (p.b == 0.0)
    throw OutOfRange("t_of_alpha: degenerate at b = 0 (alpha == beta)");
  const double t_hi = 6.0 * p.beta;
  const double a0 = alpha_of_t(p, 0.0), a1 = alpha_of_t(p, t_hi);
  if ((alpha - a0) * (alpha - a1) > 0)
    throw OutOfRange("t_of_alpha: alpha outside the family range");
  double lo = 0.0, hi = t_hi;
  const bool lo_sign = a0 > alpha;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((alpha_of_t(p, mid) > alpha) == lo_sign)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-16 * t_hi) break;
  }
  return 0.5 * (lo + hi);
}

BifurcationCurves bifurcation_curves(double beta, double b) {
  if (!(beta > 0)) throw OutOfRange("bifurcation_curves: beta must be > 0");
  if (b < 0 && !(beta < -1.0 / b))
    throw OutOfRange("bifurcation_curves: beta must be < -1/b for b < 0");
  BifurcationCurves c;
  c.alpha_TS = beta;
  c.alpha_poly = beta * (1.0 + 3.0 * b * beta);
  c.alpha_flip = beta * (1.0 - b * beta) / 2.0;
  c.flip_meaningful = b < 0 && beta > -1.0 / (7.0 * b) && beta < -1.0 / b;
  return c;
}

const char* to_string(ClcStabilityClass c) {
  switch (c) {
    case ClcStabilityClass::Saddle: return "Saddle";
    case ClcStabilityClass::StableFocusNode: return "StableFocusNode";
    case ClcStabilityClass::FlipBoundary: return "FlipBoundary";
    case ClcStabilityClass::NonHyperbolic: return "NonHyperbolic";
  }
  return "?";
}

ClcStability clc_stability(const ToyParams& p, double t) {
  if (!(t > 0) || !(t < 6.0 * p.beta))
    throw OutOfRange("clc_stability: t outside (0, 6*beta)");
  ToyParams pa = p;
  const ClcFamilyPoint fp = clc_family(p, t);
  pa.alpha = fp.alpha_of_t;

  // DP+ carries the flight-time correction:
  // dP+/d(x1,y1) - dP+/dt * dg/d(x1,y1) / dg/dt.
  const double gt = -2.0 * t - 3.0 * (fp.x1 + pa.alpha);
  const Vec2 dPdt(1.0, t + fp.x1 + pa.alpha);
  const Vec2 dgdx(-3.0 * t, -6.0);
  Mat2 dPdx;
  dPdx << 1, 0, t, 1;
  const Mat2 DPp = dPdx - (dPdt * dgdx.transpose()) / gt;
  const Mat2 J = DPp * p_minus_matrix(pa);

  ClcStability s;
  s.J = J;
  s.delta = 1.0 - 2.0 * t / (t + 6.0 * p.beta);
  s.delta_num = J.determinant();
  s.tau = J.trace();
  const double d1 = s.delta_num - s.tau + 1.0;
  const double d2 = s.delta_num + s.tau + 1.0;
  const double tol = 1e-9 * (1.0 + std::abs(s.tau) + std::abs(s.delta_num));
  if (std::abs(d2) < tol)
    s.cls = ClcStabilityClass::FlipBoundary;
  else if (d1 < -tol || d2 < -tol)
    s.cls = ClcStabilityClass::Saddle;
  else if (d1 > tol && d2 > tol)
    s.cls = ClcStabilityClass::StableFocusNode;
  else
    s.cls = ClcStabilityClass::NonHyperbolic;
  return s;
}

PolycycleSolve solve_polycycle(double b, double beta, double alpha_seed,
                               Vec2 x0_seed) {
  ToyParams base{alpha_seed, beta, b};
  if (!base.invisible_y_folds())
    throw OutOfRange("solve_polycycle: needs 1 + b*beta > 0");

  // Flight root continued smoothly through y1 = 0 (the "+" branch).
  auto flight = [](double zeta, double y1) {
    // Roots of t^2 + 3*zeta*t + 6*y1 = 0 with zeta = x1 + alpha < 0.
    const double disc = 9.0 * zeta * zeta - 24.0 * y1;
    if (disc < 0) throw NoRealReturn("solve_polycycle: complex flight root");
    return 0.5 * (-3.0 * zeta + std::sqrt(disc));
  };
  auto residual = [&](const Vec3& u) {
    ToyParams pp{u.z(), beta, b};
    const Vec2 x1 = p_minus_matrix(pp) * Vec2(u.x(), u.y());
    const double t = flight(x1.x() + pp.alpha, x1.y());
    const Vec2 x2 = p_plus(pp, t, x1.x(), x1.y());
    return Vec3(x1.y(), x2.x() - u.x(), x2.y() - u.y());
  };

  Vec3 u(x0_seed.x(), x0_seed.y(), alpha_seed);
  PolycycleSolve out;
  for (int it = 0; it < 60; ++it) {
    const Vec3 F = residual(u);
    out.iters = it;
    if (F.norm() < 1e-12 * (1.0 + u.norm())) break;
    Mat3 J;
    for (int k = 0; k < 3; ++k) {
      Vec3 up = u;
      const double h = 1e-7 * (1.0 + std::abs(u[k]));
      up[k] += h;
      J.col(k) = (residual(up) - F) / h;
    }
    const Vec3 du = J.fullPivLu().solve(-F);
    double lam = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 8; ++ls, lam *= 0.5) {
      const Vec3 cand = u + lam * du;
      try {
        if (residual(cand).norm() < F.norm() * (1.0 - 0.25 * lam)) {
          u = cand;
          moved = true;
          break;
        }
      } catch (const Error&) {
      }
    }
    if (!moved)
      throw NewtonDiverged("solve_polycycle: line search stalled");
    if (it == 59) throw NewtonDiverged("solve_polycycle: no convergence");
  }
  ToyParams pf{u.z(), beta, b};
  out.alpha = u.z();
  out.x0 = Vec2(u.x(), u.y());
  out.x1 = p_minus_matrix(pf) * out.x0;
  return out;
}

}  // namespace fillab::toy
