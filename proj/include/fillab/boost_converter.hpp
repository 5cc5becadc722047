#pragma once

#include "fillab/common.hpp"
#include "fillab/core.hpp"
#include "fillab/integrator.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fillab::boost {

/// Normalized closed-loop boost converter under sliding-mode control.
struct BoostParams {
  double omega = 0.6;
  double y_r = 1.33;
  double b = 0.08;
  double a = 1.3;
  double k = 6.0;
};

Mat3 a_minus(const BoostParams& p);
Mat3 a_plus(const BoostParams& p);
Vec3 b_vec(const BoostParams& p);

FilippovSystem make_system(const BoostParams& p);

/// Scaling-and-squaring Pade matrix exponential of A*t.
Mat3 matrix_exponential(const Mat3& A, double t);

/// Equilibria of the two affine pieces; residuals A x + b are checked to
/// 1e-12. Throws SingularParams when b = 0 or 1 + a*b = 0.
std::pair<Vec3, Vec3> equilibria(const BoostParams& p);

/// Lie derivatives of f = z along the two pieces, restricted to z = 0.
double xf_above(const BoostParams& p, double x, double y);
double yf_below(const BoostParams& p, double x, double y);

enum class ClosingMode { Polycycle, CLC };

struct ClosingState {
  double x0 = 0, y0 = 0;  // upward crossing (or S_Y point in polycycle mode)
  double x1 = 0, y1 = 0;  // downward crossing
  double tau_plus = 0, tau_minus = 0;
  double a = 0;  // converter parameter; the free unknown in polycycle mode
};

/// Flow-match residuals, Eqs. of the closing system: 3 per arc plus the
/// S_Y pinning row in polycycle mode.
Eigen::VectorXd closing_residual(const BoostParams& p, const ClosingState& s,
                                 ClosingMode mode);

struct SolveOptions {
  double tol = 1e-11;
  int max_iters = 80;
  double tau_floor = 1e-6;
  double tau_cap = 100.0;
  double margin = 1e-9;
};

struct SolveReport {
  ClosingState state;
  double residual_norm = 0;
  int iters = 0;
  bool converged = false;
  bool valid = false;
  std::string note;
};

/// Damped Newton on the closing equations; validity filters the converged
/// orbit by region membership and flight-time bounds.
SolveReport solve_closing(const BoostParams& p, ClosingMode mode,
                          const ClosingState& seed,
                          const SolveOptions& opts = {});

/// T-singularity bifurcation curve a_TS(k) and its parameter window.
double ts_curve(double k);
std::pair<double, double> k_window();

/// Detects an approximately closed crossing orbit by simulating and
/// clustering successive upward crossings.
std::optional<ClosingState> seed_from_simulation(const BoostParams& p,
                                                 double t_max = 2000.0,
                                                 double cluster_tol = 1e-3);

/// CLC anchored at the given parameters: simulate, cluster, refine.
SolveReport find_clc(const BoostParams& p, const SolveOptions& opts = {});

/// Polycycle at fixed k: anchors a CLC nearby, then frees a and activates
/// the S_Y pinning equation.
SolveReport solve_polycycle_at_k(const BoostParams& p, double a_anchor,
                                 const SolveOptions& opts = {});

struct BranchPoint {
  double k, a;
  double x0, y0, x1, y1, tau_plus, tau_minus;
};

struct BifurcationCurve {
  std::vector<BranchPoint> points;  // ordered by k
  std::string label;
  bool stalled_low = false, stalled_high = false;
};

/// Continuation of the polycycle branch over [k_min, k_max] with a secant
/// predictor on the full closing state and step halving on failure.
BifurcationCurve trace_polycycle_curve(const BoostParams& base, double k_min,
                                       double k_max, int n_points,
                                       const SolveOptions& opts = {});

}  // namespace fillab::boost
