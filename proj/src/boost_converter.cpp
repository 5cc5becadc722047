#include "fillab/boost_converter.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace fillab::boost {

Mat3 a_minus(const BoostParams& p) {
  Mat3 A;
  A << -p.b, 0, 0, 0, -p.a, 0, -p.k * p.b, p.omega - p.a, -p.omega;
  return A;
}

Mat3 a_plus(const BoostParams& p) {
  Mat3 A;
  A << -p.b, -1, 0, 1, -p.a, 0, 1 - p.k * p.b, p.omega - p.a - p.k, -p.omega;
  return A;
}

Vec3 b_vec(const BoostParams& p) {
  return Vec3(1.0, 0.0, p.k - p.omega * p.y_r);
}

FilippovSystem make_system(const BoostParams& p) {
  auto affine = [](const Mat3& A, const Vec3& b) {
    PolyField3 f;
    for (int r = 0; r < 3; ++r) {
      Poly3* comp = r == 0 ? &f.x : (r == 1 ? &f.y : &f.z);
      comp->add(0, 0, 0, b[r]);
      if (A(r, 0) != 0) comp->add(1, 0, 0, A(r, 0));
      if (A(r, 1) != 0) comp->add(0, 1, 0, A(r, 1));
      if (A(r, 2) != 0) comp->add(0, 0, 1, A(r, 2));
    }
    return SmoothField::polynomial(f);
  };
  return {affine(a_plus(p), b_vec(p)), affine(a_minus(p), b_vec(p))};
}

Mat3 matrix_exponential(const Mat3& A, double t) {
  return Mat3((A * t).exp());
}

std::pair<Vec3, Vec3> equilibria(const BoostParams& p) {
  if (p.b == 0.0 || 1.0 + p.a * p.b == 0.0)
    throw SingularParams("equilibria: b = 0 or 1 + a*b = 0");
  const Vec3 xm(1.0 / p.b, 0.0, -p.y_r);
  const double d = 1.0 + p.a * p.b;
  const Vec3 xp(p.a / d, 1.0 / d, 1.0 / d - p.y_r);
  const double rm = (a_minus(p) * xm + b_vec(p)).norm();
  const double rp = (a_plus(p) * xp + b_vec(p)).norm();
  if (rm > 1e-12 * (1 + xm.norm()) || rp > 1e-12 * (1 + xp.norm()))
    throw SingularParams("equilibria: residual check failed");
  return {xm, xp};
}

double xf_above(const BoostParams& p, double x, double y) {
  return (1 - p.k * p.b) * x + (p.omega - p.a - p.k) * y + p.k -
         p.omega * p.y_r;
}

double yf_below(const BoostParams& p, double x, double y) {
  return -p.k * p.b * x + (p.omega - p.a) * y + p.k - p.omega * p.y_r;
}

Eigen::VectorXd closing_residual(const BoostParams& p, const ClosingState& s,
                                 ClosingMode mode) {
  BoostParams pa = p;
  pa.a = s.a;
  const auto [xm, xp] = equilibria(pa);
  const Vec3 P0(s.x0, s.y0, 0.0), P1(s.x1, s.y1, 0.0);
  const Vec3 r_up = xp + matrix_exponential(a_plus(pa), s.tau_plus) * (P0 - xp) - P1;
  const Vec3 r_dn = xm + matrix_exponential(a_minus(pa), s.tau_minus) * (P1 - xm) - P0;
  const int n = mode == ClosingMode::Polycycle ? 7 : 6;
  Eigen::VectorXd r(n);
  r.segment<3>(0) = r_up;
  r.segment<3>(3) = r_dn;
  if (mode == ClosingMode::Polycycle) r(6) = yf_below(pa, s.x0, s.y0);
  return r;
}

namespace {

Eigen::VectorXd pack(const ClosingState& s, ClosingMode mode) {
  const int n = mode == ClosingMode::Polycycle ? 7 : 6;
  Eigen::VectorXd u(n);
  u << s.x0, s.y0, s.x1, s.y1, s.tau_plus, s.tau_minus,
      Eigen::VectorXd::Zero(n - 6);
  if (mode == ClosingMode::Polycycle) u(6) = s.a;
  return u;
}

ClosingState unpack(const Eigen::VectorXd& u, double fixed_a,
                    ClosingMode mode) {
  ClosingState s;
  s.x0 = u(0);
  s.y0 = u(1);
  s.x1 = u(2);
  s.y1 = u(3);
  s.tau_plus = u(4);
  s.tau_minus = u(5);
  s.a = mode == ClosingMode::Polycycle ? u(6) : fixed_a;
  return s;
}

}  // namespace

SolveReport solve_closing(const BoostParams& p, ClosingMode mode,
                          const ClosingState& seed, const SolveOptions& opts) {
  SolveReport rep;
  const int n = mode == ClosingMode::Polycycle ? 7 : 6;
  Eigen::VectorXd u = pack(seed, mode);
  auto eval = [&](const Eigen::VectorXd& v) {
    return closing_residual(p, unpack(v, seed.a, mode), mode);
  };

  Eigen::VectorXd F = eval(u);
  for (int it = 0; it < opts.max_iters; ++it) {
    rep.iters = it;
    rep.residual_norm = F.norm();
    if (rep.residual_norm < opts.tol) {
      rep.converged = true;
      break;
    }
    Eigen::MatrixXd J(n, n);
    // Analytic flight-time columns: d/dtau e^{A tau}(x - xbar) = A e(...).
    {
      BoostParams pa = p;
      pa.a = unpack(u, seed.a, mode).a;
      const auto [xm, xp] = equilibria(pa);
      const ClosingState s = unpack(u, seed.a, mode);
      const Vec3 P0(s.x0, s.y0, 0.0), P1(s.x1, s.y1, 0.0);
      Eigen::VectorXd col4 = Eigen::VectorXd::Zero(n);
      col4.segment<3>(0) = a_plus(pa) *
                           (matrix_exponential(a_plus(pa), s.tau_plus) * (P0 - xp));
      J.col(4) = col4;
      Eigen::VectorXd col5 = Eigen::VectorXd::Zero(n);
      col5.segment<3>(3) = a_minus(pa) * (matrix_exponential(a_minus(pa),
                                                             s.tau_minus) *
                                          (P1 - xm));
      J.col(5) = col5;
    }
    for (int c = 0; c < n; ++c) {
      if (c == 4 || c == 5) continue;
      Eigen::VectorXd up = u;
      const double h = 1e-7 * (1.0 + std::abs(u(c)));
      up(c) += h;
      J.col(c) = (eval(up) - F) / h;
    }
    const Eigen::VectorXd du = J.fullPivLu().solve(-F);
    double lam = 1.0;
    bool moved = false;
    const double f0 = F.squaredNorm();
    for (int ls = 0; ls < 12; ++ls, lam *= 0.5) {
      const Eigen::VectorXd cand = u + lam * du;
      const Eigen::VectorXd Fc = eval(cand);
      if (Fc.squaredNorm() < f0 * (1.0 - 1e-4 * lam)) {
        u = cand;
        F = Fc;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  rep.state = unpack(u, seed.a, mode);
  rep.residual_norm = F.norm();
  rep.converged = rep.residual_norm < opts.tol;
  if (!rep.converged) {
    rep.note = "newton did not reach tolerance";
    return rep;
  }

  // Validity: forward flight times in range and crossing-region membership.
  BoostParams pa = p;
  pa.a = rep.state.a;
  const ClosingState& s = rep.state;
  auto fail = [&](const std::string& why) {
    rep.valid = false;
    rep.note = why;
    return rep;
  };
  if (!(s.tau_plus > opts.tau_floor) || !(s.tau_minus > opts.tau_floor))
    return fail("flight time below floor");
  if (!(s.tau_plus < opts.tau_cap) || !(s.tau_minus < opts.tau_cap))
    return fail("flight time above cap");
  const double xf0 = xf_above(pa, s.x0, s.y0);
  const double yf0 = yf_below(pa, s.x0, s.y0);
  const double xf1 = xf_above(pa, s.x1, s.y1);
  const double yf1 = yf_below(pa, s.x1, s.y1);
  if (!(xf1 < -opts.margin && yf1 < -opts.margin))
    return fail("x1 not in the downward crossing region");
  if (mode == ClosingMode::CLC) {
    if (!(xf0 > opts.margin && yf0 > opts.margin))
      return fail("x0 not in the upward crossing region");
  } else {
    if (!(xf0 > opts.margin)) return fail("x0 not a fold-regular departure");
    if (std::abs(yf0) > 1e-8) return fail("x0 off S_Y");
  }
  rep.valid = true;
  return rep;
}

double ts_curve(double k) {
  const auto [k1, k2] = k_window();
  if (!(k > k1 && k < k2))
    throw OutOfWindow("ts_curve: k outside (k1, k2)");
  if (k == 625.0 / 133.0)
    throw OutOfWindow("ts_curve: degenerate point k = 625/133");
  return k * (100.0 / 133.0 - 2.0 / 25.0 * k);
}

std::pair<double, double> k_window() {
  const double r = std::sqrt(1.0 - 300713.0 / 781250.0);
  return {625.0 / 133.0 * (1.0 - r), 625.0 / 133.0 * (1.0 + r)};
}

std::optional<ClosingState> seed_from_simulation(const BoostParams& p,
                                                 double t_max,
                                                 double cluster_tol) {
  // Start near the T-singularity S_X /\ S_Y, nudged into z > 0.
  const double den = p.omega - p.a - p.k * p.k * p.b;
  if (den == 0.0) return std::nullopt;
  const double y_ts = (p.omega * p.y_r - p.k) / den;
  const double x_ts = p.k * y_ts;
  const FilippovSystem sys = make_system(p);

  IntegratorTol tol;
  tol.rtol = 1e-10;
  tol.atol = 1e-10;
  tol.domain_bound = 1e4;
  HybridTrajectory traj;
  try {
    traj = simulate(sys, Vec3(x_ts + 0.2, y_ts, 0.3), t_max, tol);
  } catch (const Error&) {
    return std::nullopt;
  }

  // Upward crossings are junctions Below -> Above.
  struct Crossing {
    double t;
    Vec3 p;
    std::size_t next_arc;
  };
  std::vector<Crossing> ups;
  for (std::size_t i = 0; i + 1 < traj.arcs.size(); ++i) {
    if (traj.arcs[i].kind == ArcKind::SmoothBelow &&
        traj.arcs[i + 1].kind == ArcKind::SmoothAbove)
      ups.push_back({traj.arcs[i].times.back(), traj.arcs[i].points.back(),
                     i + 1});
  }
  for (std::size_t i = 1; i < ups.size(); ++i) {
    if ((ups[i].p - ups[i - 1].p).norm() < cluster_tol) {
      const std::size_t ia = ups[i].next_arc;
      if (ia + 1 >= traj.arcs.size()) break;
      const Arc& up_arc = traj.arcs[ia];
      const Arc& dn_arc = traj.arcs[ia + 1];
      if (dn_arc.kind != ArcKind::SmoothBelow) continue;
      ClosingState s;
      s.x0 = ups[i].p.x();
      s.y0 = ups[i].p.y();
      s.x1 = up_arc.points.back().x();
      s.y1 = up_arc.points.back().y();
      s.tau_plus = up_arc.times.back() - up_arc.times.front();
      s.tau_minus = dn_arc.times.back() - dn_arc.times.front();
      s.a = p.a;
      return s;
    }
  }
  return std::nullopt;
}

namespace {

Vec2 t_singularity(const BoostParams& p) {
  // S_X /\ S_Y on z = 0: subtracting the two Lie derivatives gives x = k y.
  const double den = p.omega - p.a - p.k * p.k * p.b;
  const double y = (p.omega * p.y_r - p.k) / den;
  return Vec2(p.k * y, y);
}

// Catches the small CLC just below its birth at a = a_TS(k) by a ring of
// Newton seeds around the T-singularity.
std::optional<ClosingState> catch_newborn_clc(const BoostParams& base,
                                              double a_start,
                                              const SolveOptions& opts) {
  BoostParams p = base;
  p.a = a_start;
  const Vec2 ts = t_singularity(p);
  const FilippovSystem sys = make_system(p);
  CycleNewtonOptions copts;
  copts.itol.domain_bound = 1e4;
  copts.itol.t_max = 500.0;
  copts.max_iters = 30;
  const double scale = 1.0 + ts.norm();
  for (double rad : {0.02, 0.05, 0.12, 0.3}) {
    for (int dir = 0; dir < 8; ++dir) {
      const double th = 2 * M_PI * dir / 8;
      const Vec2 cand = ts + rad * scale * 0.1 * Vec2(std::cos(th), std::sin(th));
      if (!(xf_above(p, cand.x(), cand.y()) > 0 &&
            yf_below(p, cand.x(), cand.y()) > 0))
        continue;  // seed must sit in the upward crossing region
      CycleNewtonResult r;
      try {
        r = crossing_cycle_newton(sys, cand, FieldSide::Above, copts);
      } catch (const Error&) {
        continue;
      }
      if (!r.converged) continue;
      if ((r.p_first - ts).norm() < 1e-6 * scale) continue;  // the TS itself
      ClosingState s;
      s.x0 = r.p_first.x();
      s.y0 = r.p_first.y();
      s.x1 = r.p_second.x();
      s.y1 = r.p_second.y();
      s.tau_plus = r.t_first;
      s.tau_minus = r.t_second;
      s.a = a_start;
      const SolveReport rep = solve_closing(p, ClosingMode::CLC, s, opts);
      if (rep.converged && rep.valid) return rep.state;
    }
  }
  return std::nullopt;
}

}  // namespace

SolveReport find_clc(const BoostParams& p, const SolveOptions& opts) {
  SolveReport rep;
  // CLCs bifurcate from the T-singularity and exist below a_TS(k): catch a
  // newborn cycle near the curve, then continue down in a. (Direct
  // simulate-and-cluster fails here: the cycle is of saddle type.)
  double a_ts;
  try {
    a_ts = ts_curve(p.k);
  } catch (const OutOfWindow&) {
    rep.note = "k outside the T-singularity window";
    return rep;
  }
  const double a_start = std::min(a_ts - std::max(0.01, 0.01 * a_ts), p.a + 0.5);
  if (p.a > a_start) {
    // Requested parameters sit at or above the birth curve; try a direct
    // catch at p.a itself.
    auto s = catch_newborn_clc(p, p.a, opts);
    if (!s) {
      rep.note = "no CLC caught at the requested parameters";
      return rep;
    }
    return solve_closing(p, ClosingMode::CLC, *s, opts);
  }

  auto state = catch_newborn_clc(p, a_start, opts);
  if (!state) {
    rep.note = "no newborn CLC near the T-singularity curve";
    return rep;
  }
  // Secant-predictor continuation in a down to the requested value.
  double a_prev = a_start;
  ClosingState s_prev = *state;
  bool have2 = false;
  double a_prev2 = a_start;
  ClosingState s_prev2 = *state;
  double h = std::max(0.02, (a_start - p.a) / 12);
  double a_cur = a_start;
  while (a_cur > p.a + 1e-12) {
    const double a_next = std::max(p.a, a_cur - h);
    ClosingState seed = s_prev;
    if (have2 && a_prev != a_prev2) {
      const double w = (a_next - a_prev) / (a_prev - a_prev2);
      seed.x0 += w * (s_prev.x0 - s_prev2.x0);
      seed.y0 += w * (s_prev.y0 - s_prev2.y0);
      seed.x1 += w * (s_prev.x1 - s_prev2.x1);
      seed.y1 += w * (s_prev.y1 - s_prev2.y1);
      seed.tau_plus += w * (s_prev.tau_plus - s_prev2.tau_plus);
      seed.tau_minus += w * (s_prev.tau_minus - s_prev2.tau_minus);
    }
    seed.a = a_next;
    BoostParams pa = p;
    pa.a = a_next;
    const SolveReport r = solve_closing(pa, ClosingMode::CLC, seed, opts);
    if (r.converged && r.valid) {
      a_prev2 = a_prev;
      s_prev2 = s_prev;
      have2 = true;
      a_prev = a_next;
      s_prev = r.state;
      a_cur = a_next;
      h = std::min(h * 1.5, 0.2);
    } else {
      h *= 0.5;
      if (h < 1e-5) {
        rep.note = "CLC continuation stalled at a = " + std::to_string(a_cur);
        return rep;
      }
    }
  }
  BoostParams pa = p;
  return solve_closing(pa, ClosingMode::CLC, s_prev, opts);
}

SolveReport solve_polycycle_at_k(const BoostParams& p, double a_anchor,
                                 const SolveOptions& opts) {
  BoostParams pa = p;
  pa.a = a_anchor;
  SolveReport clc = find_clc(pa, opts);
  if (!clc.converged) {
    // March the anchor upward a little; close to the polycycle the orbit
    // may converge too slowly for clustering.
    for (double bump : {0.05, 0.1, 0.2}) {
      pa.a = a_anchor + bump;
      clc = find_clc(pa, opts);
      if (clc.converged) break;
    }
    if (!clc.converged) return clc;
  }
  SolveReport rep = solve_closing(p, ClosingMode::Polycycle, clc.state, opts);
  if (rep.converged && rep.valid) return rep;

  // Fallback: continue the CLC family in a and bracket the S_Y residual.
  double a_hi = clc.state.a;
  ClosingState s_hi = clc.state;
  double h_hi = yf_below([&] {
    BoostParams q = p;
    q.a = a_hi;
    return q;
  }(), s_hi.x0, s_hi.y0);
  double step = 0.04;
  for (int it = 0; it < 200; ++it) {
    double a_lo = a_hi - step;
    BoostParams q = p;
    q.a = a_lo;
    ClosingState seed = s_hi;
    seed.a = a_lo;
    SolveReport r = solve_closing(q, ClosingMode::CLC, seed, opts);
    if (!r.converged) {
      step *= 0.5;
      if (step < 1e-5) break;
      continue;
    }
    const double h_lo = yf_below(q, r.state.x0, r.state.y0);
    if ((h_lo > 0) != (h_hi > 0)) {
      // Bracketed: polish in polycycle mode from this side.
      SolveReport poly = solve_closing(p, ClosingMode::Polycycle, r.state, opts);
      if (poly.converged && poly.valid) return poly;
      poly = solve_closing(p, ClosingMode::Polycycle, s_hi, opts);
      return poly;
    }
    a_hi = a_lo;
    s_hi = r.state;
    h_hi = h_lo;
  }
  rep.note = "polycycle bracket not found along the CLC family";
  rep.converged = false;
  rep.valid = false;
  return rep;
}

BifurcationCurve trace_polycycle_curve(const BoostParams& base, double k_min,
                                       double k_max, int n_points,
                                       const SolveOptions& opts) {
  BifurcationCurve curve;
  curve.label = "polycycle";
  const double k_anchor = std::clamp(6.0, k_min, k_max);
  BoostParams p0 = base;
  p0.k = k_anchor;
  SolveReport anchor = solve_polycycle_at_k(p0, 0.8, opts);
  if (!(anchor.converged && anchor.valid))
    throw ContinuationStalled("trace_polycycle_curve: no anchor polycycle at k = " +
                              std::to_string(k_anchor));

  auto to_point = [](double k, const ClosingState& s) {
    return BranchPoint{k, s.a, s.x0, s.y0, s.x1, s.y1, s.tau_plus, s.tau_minus};
  };

  const double h0 = std::max(1e-3, (k_max - k_min) / std::max(2, n_points));
  auto sweep = [&](double dir, bool& stalled) {
    std::vector<BranchPoint> pts;
    double k_prev = k_anchor;
    ClosingState s_prev = anchor.state;
    double k_prev2 = k_anchor;
    ClosingState s_prev2 = anchor.state;
    bool have2 = false;
    double h = h0;
    const double k_end = dir > 0 ? k_max : k_min;
    while ((dir > 0 ? k_prev < k_end - 1e-12 : k_prev > k_end + 1e-12)) {
      double k_next = k_prev + dir * h;
      if ((dir > 0 && k_next > k_end) || (dir < 0 && k_next < k_end))
        k_next = k_end;
      // Secant predictor on the full state vector.
      ClosingState seed = s_prev;
      if (have2 && k_prev != k_prev2) {
        const double w = (k_next - k_prev) / (k_prev - k_prev2);
        seed.x0 += w * (s_prev.x0 - s_prev2.x0);
        seed.y0 += w * (s_prev.y0 - s_prev2.y0);
        seed.x1 += w * (s_prev.x1 - s_prev2.x1);
        seed.y1 += w * (s_prev.y1 - s_prev2.y1);
        seed.tau_plus += w * (s_prev.tau_plus - s_prev2.tau_plus);
        seed.tau_minus += w * (s_prev.tau_minus - s_prev2.tau_minus);
        seed.a += w * (s_prev.a - s_prev2.a);
      }
      BoostParams pk = base;
      pk.k = k_next;
      const SolveReport r = solve_closing(pk, ClosingMode::Polycycle, seed, opts);
      if (r.converged && r.valid) {
        pts.push_back(to_point(k_next, r.state));
        k_prev2 = k_prev;
        s_prev2 = s_prev;
        have2 = true;
        k_prev = k_next;
        s_prev = r.state;
        h = std::min(h * 1.4, 4 * h0);
      } else {
        h *= 0.5;
        if (h < 1e-4) {
          stalled = true;
          break;
        }
      }
    }
    return pts;
  };

  bool stall_hi = false, stall_lo = false;
  std::vector<BranchPoint> up = sweep(+1.0, stall_hi);
  std::vector<BranchPoint> dn = sweep(-1.0, stall_lo);
  curve.stalled_high = stall_hi;
  curve.stalled_low = stall_lo;
  std::reverse(dn.begin(), dn.end());
  curve.points = std::move(dn);
  curve.points.push_back(to_point(k_anchor, anchor.state));
  curve.points.insert(curve.points.end(), up.begin(), up.end());
  return curve;
}

}  // namespace fillab::boost
