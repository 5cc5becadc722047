#pragma once

#include "fillab/common.hpp"
#include "fillab/core.hpp"

#include <optional>
#include <vector>

namespace fillab {

struct IntegratorTol {
  double rtol = 1e-10;
  double atol = 1e-12;
  double event_f = 1e-12;        // |f| at the refined root
  double event_dt = 1e-13;       // time bracket width at the refined root
  double trivial_rel = 1e-10;    // roots with t < trivial_rel*(1+t_est) ignored
  double graze = 1e-11;          // |extremum of f| below this is a graze
  double domain_bound = 1e3;     // BlowUp beyond this
  double h_min_rel = 1e-14;
  long max_steps = 2000000;
  double t_max = 1e3;            // default horizon for half_return
};

enum class ArcKind { SmoothAbove, SmoothBelow, Sliding };
enum class EventType {
  CrossIn,
  CrossOut,
  TangencyHit,
  SlidingEntry,
  SlidingExit,
  TimeLimit,
  NonDeterministicExit,  // escaping point reached exactly; flow is multivalued
};

const char* to_string(ArcKind k);
const char* to_string(EventType e);

struct Arc {
  ArcKind kind;
  std::vector<double> times;
  std::vector<Vec3> points;
  EventType entry_event = EventType::TimeLimit;
  EventType exit_event = EventType::TimeLimit;
};

struct Event {
  double t;
  EventType type;
  Vec3 point;
};

struct HybridTrajectory {
  std::vector<Arc> arcs;
  std::vector<Event> events;
};

struct SwitchResult {
  Arc arc;
  std::optional<Vec3> hit;  // z projected to 0
  double flight_time = 0;
  bool grazed = false;      // hit was an even-order contact
};

/// Integrates `field` from p0 on the given side until f = z first changes
/// sign (dense-output bracketing + safeguarded secant) or t_max is reached.
/// Starting points on Sigma are fine; the trivial root at t = 0 is excluded.
SwitchResult integrate_to_switch(const SmoothField& field, FieldSide side,
                                 const Vec3& p0, double t_max,
                                 const IntegratorTol& tol = {});

/// Plain flow for a fixed time, no event handling.
Vec3 flow_to_time(const SmoothField& field, const Vec3& p0, double t,
                  const IntegratorTol& tol = {});

/// First return to Sigma through the chosen side. Invisible tangency points
/// of the chosen field are their own return. Throws NoReturn /
/// GrazingUnresolved / WrongSide.
Vec3 half_return(const FilippovSystem& sys, const Vec3& p, FieldSide side,
                 const IntegratorTol& tol = {}, double* flight = nullptr);

/// Integrates the sliding vector field inside Sigma until a region boundary
/// (Xf or Yf root) or t_max.
Arc slide(const FilippovSystem& sys, const Vec3& p, double t_max,
          const IntegratorTol& tol = {});

/// Event-driven hybrid trajectory per Filippov's convention.
HybridTrajectory simulate(const FilippovSystem& sys, const Vec3& p0,
                          double t_max, const IntegratorTol& tol = {});

struct CycleNewtonOptions {
  int max_iters = 40;
  double tol = 1e-11;
  double fd_step = 1e-7;
  IntegratorTol itol;
};

struct CycleNewtonResult {
  bool converged = false;
  Vec2 p_first;   // fixed point on Sigma (start of first half-map)
  Vec2 p_second;  // image under the first half-map
  double t_first = 0, t_second = 0;
  int iters = 0;
};

/// Newton (finite-difference Jacobian, damped) on the two-sided return map
/// starting with `first_side`. The generic numeric CLC finder.
CycleNewtonResult crossing_cycle_newton(const FilippovSystem& sys, Vec2 seed,
                                        FieldSide first_side,
                                        const CycleNewtonOptions& opts = {});

}  // namespace fillab
