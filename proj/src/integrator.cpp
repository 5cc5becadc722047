#include "fillab/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace fillab {

const char* to_string(ArcKind k) {
  switch (k) {
    case ArcKind::SmoothAbove: return "above";
    case ArcKind::SmoothBelow: return "below";
    case ArcKind::Sliding: return "sliding";
  }
  return "?";
}

const char* to_string(EventType e) {
  switch (e) {
    case EventType::CrossIn: return "CrossIn";
    case EventType::CrossOut: return "CrossOut";
    case EventType::TangencyHit: return "TangencyHit";
    case EventType::SlidingEntry: return "SlidingEntry";
    case EventType::SlidingExit: return "SlidingExit";
    case EventType::TimeLimit: return "TimeLimit";
    case EventType::NonDeterministicExit: return "NonDeterministicExit";
  }
  return "?";
}

namespace {

using Rhs = std::function<Vec3(const Vec3&)>;

// Dormand-Prince 5(4) tableau.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187,
                 A53 = 64448.0 / 6561, A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double A71 = 35.0 / 384, A73 = 500.0 / 1113, A74 = 125.0 / 192,
                 A75 = -2187.0 / 6784, A76 = 11.0 / 84;
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920,
                 E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40;
constexpr double D1 = -12715105075.0 / 11282082432.0;
constexpr double D3 = 87487479700.0 / 32700410799.0;
constexpr double D4 = -10690763975.0 / 1880347072.0;
constexpr double D5 = 701980252875.0 / 199316789632.0;
constexpr double D6 = -1453857185.0 / 822651844.0;
constexpr double D7 = 69997945.0 / 29380423.0;

struct DenseStep {
  double t0 = 0, h = 0;
  Vec3 r1, r2, r3, r4, r5;

  Vec3 eval(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }
  Vec3 deriv(double t) const {
    const double th = (t - t0) / h;
    Vec3 d = r2 + (1 - 2 * th) * r3 + (2 * th - 3 * th * th) * r4 +
             (2 * th - 6 * th * th + 4 * th * th * th) * r5;
    return d / h;
  }
};

class Dopri5 {
 public:
  Dopri5(Rhs rhs, const IntegratorTol& tol) : rhs_(std::move(rhs)), tol_(tol) {}

  void start(double t0, const Vec3& y0, double t_end) {
    t_ = t0;
    y_ = y0;
    t_end_ = t_end;
    k1_ = rhs_(y0);
    h_ = initial_step();
    steps_ = 0;
  }

  bool done() const { return t_ >= t_end_; }
  double t() const { return t_; }
  const Vec3& y() const { return y_; }
  const Vec3& f() const { return k1_; }
  const DenseStep& dense() const { return dense_; }
  double t_prev() const { return dense_.t0; }
  Vec3 y_prev() const { return dense_.r1; }
  Vec3 f_prev() const { return f_prev_; }

  /// Advances one accepted step (dense output filled). Returns false when
  /// t_end was already reached.
  bool step() {
    if (done()) return false;
    const double scale_t = std::max(std::abs(t_), std::abs(t_end_));
    for (;;) {
      if (++steps_ > tol_.max_steps)
        throw StepSizeUnderflow("integrator: step budget exhausted");
      if (h_ < tol_.h_min_rel * (1.0 + scale_t))
        throw StepSizeUnderflow("integrator: step size underflow at t = " +
                                std::to_string(t_));
      bool last = false;
      if (t_ + h_ >= t_end_) {
        h_ = t_end_ - t_;
        last = true;
      }
      const double h = h_;
      const Vec3 k2 = rhs_(y_ + h * (A21 * k1_));
      const Vec3 k3 = rhs_(y_ + h * (A31 * k1_ + A32 * k2));
      const Vec3 k4 = rhs_(y_ + h * (A41 * k1_ + A42 * k2 + A43 * k3));
      const Vec3 k5 = rhs_(y_ + h * (A51 * k1_ + A52 * k2 + A53 * k3 + A54 * k4));
      const Vec3 k6 = rhs_(
          y_ + h * (A61 * k1_ + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
      const Vec3 y1 =
          y_ + h * (A71 * k1_ + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
      const Vec3 k7 = rhs_(y1);

      const Vec3 err_v =
          h * (E1 * k1_ + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
      double err = 0;
      for (int i = 0; i < 3; ++i) {
        const double sc =
            tol_.atol + tol_.rtol * std::max(std::abs(y_[i]), std::abs(y1[i]));
        const double e = err_v[i] / sc;
        err += e * e;
      }
      err = std::sqrt(err / 3.0);

      if (err <= 1.0) {
        dense_.t0 = t_;
        dense_.h = h;
        dense_.r1 = y_;
        dense_.r2 = y1 - y_;
        dense_.r3 = h * k1_ - dense_.r2;
        dense_.r4 = dense_.r2 - h * k7 - dense_.r3;
        dense_.r5 = h * (D1 * k1_ + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 +
                         D7 * k7);
        f_prev_ = k1_;
        t_ = last ? t_end_ : t_ + h;
        y_ = y1;
        k1_ = k7;  // FSAL
        const double fac =
            std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
        h_ = h * fac;
        return true;
      }
      h_ = h * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
    }
  }

 private:
  double initial_step() const {
    double d0 = 0, d1 = 0;
    for (int i = 0; i < 3; ++i) {
      const double sc = tol_.atol + tol_.rtol * std::abs(y_[i]);
      d0 += (y_[i] / sc) * (y_[i] / sc);
      d1 += (k1_[i] / sc) * (k1_[i] / sc);
    }
    d0 = std::sqrt(d0 / 3);
    d1 = std::sqrt(d1 / 3);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, std::abs(t_end_ - t_));
    if (h0 <= 0) h0 = 1e-12;
    const Vec3 y1 = y_ + h0 * k1_;
    const Vec3 f1 = rhs_(y1);
    double d2 = 0;
    for (int i = 0; i < 3; ++i) {
      const double sc = tol_.atol + tol_.rtol * std::abs(y_[i]);
      const double e = (f1[i] - k1_[i]) / sc;
      d2 += e * e;
    }
    d2 = std::sqrt(d2 / 3) / h0;
    const double dm = std::max(d1, d2);
    double h1 = dm > 1e-15 ? std::pow(0.01 / dm, 0.2) : std::max(1e-6, h0 * 1e-3);
    return std::min({100 * h0, h1, std::abs(t_end_ - t_)});
  }

  Rhs rhs_;
  IntegratorTol tol_;
  double t_ = 0, t_end_ = 0, h_ = 0;
  long steps_ = 0;
  Vec3 y_, k1_, f_prev_;
  DenseStep dense_;
};

// Safeguarded secant + bisection on a dense-output scalar, bracketing a
// downward zero crossing: g(lo) >= 0 >= g(hi).
double refine_root(const std::function<double(double)>& g, double lo, double hi,
                   const IntegratorTol& tol) {
  double glo = g(lo), ghi = g(hi);
  double t = hi;
  for (int it = 0; it < 80; ++it) {
    if (hi - lo < tol.event_dt * (1.0 + std::abs(hi))) break;
    double cand;
    if (ghi != glo) {
      cand = hi - ghi * (hi - lo) / (ghi - glo);
      if (!(cand > lo && cand < hi)) cand = 0.5 * (lo + hi);
    } else {
      cand = 0.5 * (lo + hi);
    }
    // Force a bisection every third iteration to guarantee progress.
    if (it % 3 == 2) cand = 0.5 * (lo + hi);
    const double gc = g(cand);
    if (gc >= 0) {
      lo = cand;
      glo = gc;
    } else {
      hi = cand;
      ghi = gc;
    }
    t = cand;
  }
  (void)t;
  return 0.5 * (lo + hi);
}

struct EventScan {
  bool found = false;
  bool grazed = false;
  double t = 0;
  Vec3 point;
};

}  // namespace

SwitchResult integrate_to_switch(const SmoothField& field, FieldSide side,
                                 const Vec3& p0, double t_max,
                                 const IntegratorTol& tol) {
  const double s = side == FieldSide::Above ? 1.0 : -1.0;
  const double g0 = s * p0.z();
  const bool on_sigma = std::abs(g0) < 1e-9 * (1.0 + p0.norm());
  if (!on_sigma && g0 < 0)
    throw WrongSide("integrate_to_switch: start point lies strictly on the " +
                    std::string(side == FieldSide::Above ? "below" : "above") +
                    " side");
  const double t_triv = tol.trivial_rel * (1.0 + std::min(t_max, 100.0));

  SwitchResult out;
  out.arc.kind =
      side == FieldSide::Above ? ArcKind::SmoothAbove : ArcKind::SmoothBelow;
  out.arc.times.push_back(0.0);
  out.arc.points.push_back(p0);

  Rhs rhs = [&field](const Vec3& p) { return field(p); };
  Dopri5 stepper(rhs, tol);
  stepper.start(0.0, p0, t_max);

  auto g_of = [&](const DenseStep& d, double t) { return s * d.eval(t).z(); };

  // Polynomial fields make the stepper locally exact, so accepted steps can
  // span several extrema of f; the dense output is scanned on a sample grid.
  constexpr int kScan = 8;

  while (stepper.step()) {
    const Vec3& y = stepper.y();
    const DenseStep& d = stepper.dense();
    const double ta = d.t0, tb = d.t0 + d.h;

    EventScan ev;
    double tv[kScan + 1], gv[kScan + 1];
    for (int i = 0; i <= kScan; ++i) {
      tv[i] = ta + (tb - ta) * i / kScan;
      gv[i] = g_of(d, tv[i]);
    }
    for (int i = 0; i < kScan && !ev.found; ++i) {
      const double t0 = tv[i], t1 = tv[i + 1];
      const double g0 = gv[i], g1 = gv[i + 1];
      if (g0 >= 0 && g1 < 0) {
        double lo = t0;
        if (on_sigma && t0 <= t_triv) {
          // First sub-interval from a Sigma start: move the bracket past the
          // trivial root so refinement cannot collapse onto t = 0.
          lo = std::min(t_triv, t0 + 0.5 * (t1 - t0));
          if (g_of(d, lo) <= 0)
            throw WrongSide("integrate_to_switch: field leaves the " +
                            std::string(to_string(side)) + " side at start");
        }
        const double root =
            refine_root([&](double t) { return g_of(d, t); }, lo, t1, tol);
        if (root > t_triv) {
          ev.found = true;
          ev.t = root;
          ev.point = d.eval(root);
        }
      } else if (g0 >= 0 && g1 >= 0) {
        // Interior dip: g' changes sign - -> + within the sub-interval.
        const double dg0 = s * d.deriv(t0).z();
        const double dg1 = s * d.deriv(t1).z();
        if (dg0 < 0 && dg1 > 0 && t1 > t_triv) {
          double a = t0, b = t1;
          for (int it = 0;
               it < 60 && b - a > tol.event_dt * (1 + std::abs(b)); ++it) {
            const double m = 0.5 * (a + b);
            if (s * d.deriv(m).z() < 0)
              a = m;
            else
              b = m;
          }
          const double text = 0.5 * (a + b);
          const double gext = g_of(d, text);
          if (gext < -tol.event_f) {
            // Two roots inside; take the first.
            const double root = refine_root(
                [&](double t) { return g_of(d, t); }, t0, text, tol);
            if (root > t_triv) {
              ev.found = true;
              ev.t = root;
              ev.point = d.eval(root);
            }
          } else if (std::abs(gext) <= tol.graze && text > t_triv) {
            ev.found = true;
            ev.grazed = true;
            ev.t = text;
            ev.point = d.eval(text);
          }
        }
      }
    }

    if (ev.found) {
      Vec3 hit = ev.point;
      hit.z() = 0.0;
      out.arc.times.push_back(ev.t);
      out.arc.points.push_back(hit);
      out.arc.exit_event = ev.grazed ? EventType::TangencyHit : EventType::CrossOut;
      out.hit = hit;
      out.flight_time = ev.t;
      out.grazed = ev.grazed;
      return out;
    }

    // Bound check only after the dense scan: an accepted step may end far
    // outside the domain while the Sigma-hit sits inside it.
    if (y.norm() > tol.domain_bound)
      throw BlowUp("integrate_to_switch: |p| exceeded domain bound");

    // Keep the interior samples: polynomial flows take huge exact steps and
    // endpoint-only arcs would export unusably sparse trajectories.
    for (int i = 1; i < kScan; ++i) {
      out.arc.times.push_back(tv[i]);
      out.arc.points.push_back(d.eval(tv[i]));
    }
    out.arc.times.push_back(stepper.t());
    out.arc.points.push_back(y);
  }

  out.arc.exit_event = EventType::TimeLimit;
  out.flight_time = t_max;
  return out;
}

Vec3 flow_to_time(const SmoothField& field, const Vec3& p0, double t,
                  const IntegratorTol& tol) {
  if (t == 0.0) return p0;
  Rhs rhs = [&field](const Vec3& p) { return field(p); };
  if (t > 0) {
    Dopri5 st(rhs, tol);
    st.start(0.0, p0, t);
    while (st.step()) {
    }
    return st.y();
  }
  Rhs back = [&field](const Vec3& p) { return Vec3(-field(p)); };
  Dopri5 st(back, tol);
  st.start(0.0, p0, -t);
  while (st.step()) {
  }
  return st.y();
}

Vec3 half_return(const FilippovSystem& sys, const Vec3& p, FieldSide side,
                 const IntegratorTol& tol, double* flight) {
  const SmoothField& field = sys.field(side);
  const double dir = side == FieldSide::Above ? 1.0 : -1.0;
  const double tt = 1e-9 * (1.0 + field(p).norm());
  const double l1 = lie_derivative(field, p, 1);
  if (std::abs(l1) < tt) {
    const double l2 = lie_derivative(field, p, 2);
    double into = dir * l2;
    if (std::abs(l2) < tt) into = dir * lie_derivative(field, p, 3);
    if (into <= tt) {
      // Invisible (or flat) tangency: the half-return map fixes the point.
      if (flight) *flight = 0.0;
      Vec3 q = p;
      q.z() = 0.0;
      return q;
    }
  } else if (dir * l1 < 0) {
    throw WrongSide("half_return: field points out of the " +
                    std::string(to_string(side)) + " side");
  }
  SwitchResult res = integrate_to_switch(field, side, p, tol.t_max, tol);
  if (!res.hit)
    throw NoReturn("half_return: no Sigma return within t_max");
  if (res.grazed)
    throw GrazingUnresolved("half_return: refined root is an even-order contact");
  if (flight) *flight = res.flight_time;
  return *res.hit;
}

Arc slide(const FilippovSystem& sys, const Vec3& p, double t_max,
          const IntegratorTol& tol) {
  {
    CoreTol ct;
    const Region r = classify_region(sys, p, ct);
    if (r != Region::Sliding && r != Region::Escaping)
      throw NotSlidingRegion("slide: start point not in Sigma^s or Sigma^e");
  }
  auto xf = [&](const Vec3& q) {
    return lie_derivative(sys.above, Vec3(q.x(), q.y(), 0.0), 1);
  };
  auto yf = [&](const Vec3& q) {
    return lie_derivative(sys.below, Vec3(q.x(), q.y(), 0.0), 1);
  };
  Rhs rhs = [&sys](const Vec3& q) {
    const Vec3 p0(q.x(), q.y(), 0.0);
    const double a = lie_derivative(sys.above, p0, 1);
    const double b = lie_derivative(sys.below, p0, 1);
    const Vec3 v = (b * sys.above(p0) - a * sys.below(p0)) / (b - a);
    return Vec3(v.x(), v.y(), 0.0);
  };

  Arc arc;
  arc.kind = ArcKind::Sliding;
  arc.times.push_back(0.0);
  arc.points.push_back(Vec3(p.x(), p.y(), 0.0));

  Dopri5 stepper(rhs, tol);
  stepper.start(0.0, Vec3(p.x(), p.y(), 0.0), t_max);
  const double t_triv = tol.trivial_rel * (1.0 + std::min(t_max, 100.0));

  constexpr int kScan = 8;
  while (stepper.step()) {
    const DenseStep& d = stepper.dense();
    const double ta = d.t0, tb = d.t0 + d.h;
    bool found = false;
    double t_evt = tb;
    // Region boundary: first root of Xf or Yf inside the step.
    for (auto& mon : {std::function<double(const Vec3&)>(xf),
                      std::function<double(const Vec3&)>(yf)}) {
      for (int i = 0; i < kScan; ++i) {
        const double t0 = ta + (tb - ta) * i / kScan;
        const double t1 = ta + (tb - ta) * (i + 1) / kScan;
        const double ga = mon(d.eval(t0));
        const double gb = mon(d.eval(t1));
        if (ga == 0.0 && t0 <= t_triv) continue;
        if ((ga > 0) != (gb > 0) || gb == 0.0) {
          const double sgn = ga >= gb ? 1.0 : -1.0;
          double root = refine_root(
              [&](double t) { return sgn * mon(d.eval(t)); }, t0, t1, tol);
          if (root > t_triv && root < t_evt) {
            found = true;
            t_evt = root;
          }
          break;
        }
      }
    }
    if (found) {
      Vec3 q = d.eval(t_evt);
      q.z() = 0.0;
      arc.times.push_back(t_evt);
      arc.points.push_back(q);
      arc.exit_event = EventType::SlidingExit;
      return arc;
    }
    Vec3 q = stepper.y();
    q.z() = 0.0;
    arc.times.push_back(stepper.t());
    arc.points.push_back(q);
    if (q.norm() > tol.domain_bound)
      throw BlowUp("slide: |p| exceeded domain bound");
  }
  arc.exit_event = EventType::TimeLimit;
  return arc;
}

HybridTrajectory simulate(const FilippovSystem& sys, const Vec3& p0,
                          double t_max, const IntegratorTol& tol) {
  HybridTrajectory traj;
  double t = 0.0;
  Vec3 p = p0;
  const CoreTol ct;

  auto shift_arc = [&](Arc arc, double t0, EventType entry) {
    for (auto& tv : arc.times) tv += t0;
    arc.entry_event = entry;
    return arc;
  };

  EventType pending_entry = EventType::TimeLimit;
  int guard = 0;
  while (t < t_max && ++guard < 100000) {
    if (std::abs(p.z()) > ct.on_sigma) {
      const FieldSide side = p.z() > 0 ? FieldSide::Above : FieldSide::Below;
      SwitchResult res =
          integrate_to_switch(sys.field(side), side, p, t_max - t, tol);
      traj.arcs.push_back(shift_arc(res.arc, t, pending_entry));
      t += res.flight_time;
      if (!res.hit) {
        traj.events.push_back({t, EventType::TimeLimit, p});
        return traj;
      }
      p = *res.hit;
      if (res.grazed) {
        traj.events.push_back({t, EventType::TangencyHit, p});
        return traj;
      }
      pending_entry = EventType::CrossIn;
      // fall through to the Sigma-point decision
    }

    // Decision at a Sigma point.
    const double xf = lie_derivative(sys.above, p, 1);
    const double yf = lie_derivative(sys.below, p, 1);
    const double ttx = 1e-9 * (1.0 + sys.above(p).norm());
    const double tty = 1e-9 * (1.0 + sys.below(p).norm());
    const bool tx = std::abs(xf) < ttx;
    const bool ty = std::abs(yf) < tty;

    FieldSide next_side;
    bool do_slide = false;
    if (!tx && !ty) {
      if (xf > 0 && yf > 0) next_side = FieldSide::Above;
      else if (xf < 0 && yf < 0) next_side = FieldSide::Below;
      else if (xf < 0 && yf > 0) do_slide = true;
      else {
        // Escaping point reached exactly: the forward flow is multivalued.
        traj.events.push_back({t, EventType::NonDeterministicExit, p});
        return traj;
      }
    } else {
      // Tangency of at least one field: launch along a visible tangency,
      // slide if the configuration is attracting, otherwise stop.
      const double x2f = lie_derivative(sys.above, p, 2);
      const double y2f = lie_derivative(sys.below, p, 2);
      if (tx && !ty) {
        if (x2f > ttx && yf > 0) next_side = FieldSide::Above;
        else if (yf < 0 && x2f < -ttx) next_side = FieldSide::Below;
        else do_slide = true;
      } else if (ty && !tx) {
        if (y2f < -tty && xf < 0) next_side = FieldSide::Below;
        else if (xf > 0 && y2f > tty) next_side = FieldSide::Above;
        else do_slide = true;
      } else {
        traj.events.push_back({t, EventType::TangencyHit, p});
        return traj;
      }
    }

    if (do_slide) {
      traj.events.push_back({t, EventType::SlidingEntry, p});
      Arc arc = slide(sys, p, t_max - t, tol);
      const double dur = arc.times.back();
      Vec3 q = arc.points.back();
      traj.arcs.push_back(shift_arc(std::move(arc), t, EventType::SlidingEntry));
      t += dur;
      if (traj.arcs.back().exit_event == EventType::TimeLimit) {
        traj.events.push_back({t, EventType::TimeLimit, q});
        return traj;
      }
      traj.events.push_back({t, EventType::SlidingExit, q});
      p = q;
      // Exit through a visible fold launches into that side.
      const double xfe = lie_derivative(sys.above, p, 1);
      const double yfe = lie_derivative(sys.below, p, 1);
      const double x2f = lie_derivative(sys.above, p, 2);
      const double y2f = lie_derivative(sys.below, p, 2);
      if (std::abs(xfe) < 10 * ttx && x2f > 0) {
        pending_entry = EventType::SlidingExit;
        p.z() = 0;
        // launch above
        SwitchResult res = integrate_to_switch(sys.above, FieldSide::Above, p,
                                               t_max - t, tol);
        traj.arcs.push_back(shift_arc(res.arc, t, EventType::SlidingExit));
        t += res.flight_time;
        if (!res.hit) {
          traj.events.push_back({t, EventType::TimeLimit, p});
          return traj;
        }
        p = *res.hit;
        pending_entry = EventType::CrossIn;
        continue;
      }
      if (std::abs(yfe) < 10 * tty && y2f < 0) {
        SwitchResult res = integrate_to_switch(sys.below, FieldSide::Below, p,
                                               t_max - t, tol);
        traj.arcs.push_back(shift_arc(res.arc, t, EventType::SlidingExit));
        t += res.flight_time;
        if (!res.hit) {
          traj.events.push_back({t, EventType::TimeLimit, p});
          return traj;
        }
        p = *res.hit;
        pending_entry = EventType::CrossIn;
        continue;
      }
      traj.events.push_back({t, EventType::TangencyHit, p});
      return traj;
    }

    traj.events.push_back({t, EventType::CrossIn, p});
    // Nudge off Sigma bookkeeping: the arc integrator accepts z = 0 starts.
    SwitchResult res =
        integrate_to_switch(sys.field(next_side), next_side, p, t_max - t, tol);
    traj.arcs.push_back(shift_arc(res.arc, t, EventType::CrossIn));
    t += res.flight_time;
    if (!res.hit) {
      traj.events.push_back({t, EventType::TimeLimit, p});
      return traj;
    }
    p = *res.hit;
    if (res.grazed) {
      traj.events.push_back({t, EventType::TangencyHit, p});
      return traj;
    }
    pending_entry = EventType::CrossIn;
  }
  return traj;
}

CycleNewtonResult crossing_cycle_newton(const FilippovSystem& sys, Vec2 seed,
                                        FieldSide first_side,
                                        const CycleNewtonOptions& opts) {
  const FieldSide second_side =
      first_side == FieldSide::Above ? FieldSide::Below : FieldSide::Above;
  CycleNewtonResult res;

  auto full_map = [&](const Vec2& p, double* t1 = nullptr,
                      double* t2 = nullptr, Vec2* mid = nullptr) {
    const Vec3 q3 = half_return(sys, Vec3(p.x(), p.y(), 0.0), first_side,
                                opts.itol, t1);
    if (mid) *mid = Vec2(q3.x(), q3.y());
    const Vec3 r3 = half_return(sys, q3, second_side, opts.itol, t2);
    return Vec2(r3.x(), r3.y());
  };

  Vec2 p = seed;
  for (int it = 0; it < opts.max_iters; ++it) {
    double t1 = 0, t2 = 0;
    Vec2 mid;
    Vec2 F;
    try {
      F = full_map(p, &t1, &t2, &mid) - p;
    } catch (const Error&) {
      return res;
    }
    const double fn = F.norm();
    if (fn < opts.tol * (1.0 + p.norm())) {
      res.converged = true;
      res.p_first = p;
      res.p_second = mid;
      res.t_first = t1;
      res.t_second = t2;
      res.iters = it;
      return res;
    }
    Mat2 J;
    const double h = opts.fd_step * (1.0 + p.norm());
    for (int c = 0; c < 2; ++c) {
      Vec2 pp = p;
      pp[c] += h;
      Vec2 Fp;
      try {
        Fp = full_map(pp) - pp;
      } catch (const Error&) {
        return res;
      }
      J.col(c) = (Fp - F) / h;
    }
    Vec2 dp = J.fullPivLu().solve(-F);
    // Backtracking keeps iterates inside the map's domain.
    double lam = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 8; ++ls, lam *= 0.5) {
      const Vec2 cand = p + lam * dp;
      try {
        const Vec2 Fc = full_map(cand) - cand;
        if (Fc.norm() < fn * (1.0 - 0.25 * lam) || Fc.norm() < opts.tol) {
          p = cand;
          moved = true;
          break;
        }
      } catch (const Error&) {
      }
    }
    if (!moved) p = p + 0.25 * dp;  // last resort probe
  }
  return res;
}

}  // namespace fillab
