#pragma once

#include "fillab/common.hpp"
#include "fillab/core.hpp"
#include "fillab/normal_form.hpp"

namespace fillab::toy {

/// Semi-linear cusp-fold model: X = (1, x+alpha, -y) above,
/// Y = (-1, -beta, -x-b*y) below.
struct ToyParams {
  double alpha = 0.0;
  double beta = 1.0;
  double b = -1.0 / 3.0;

  /// Invisible Y-folds need 1 + b*beta > 0.
  bool invisible_y_folds() const { return 1.0 + b * beta > 0.0; }
};

FilippovSystem make_system(const ToyParams& p);

/// The model recast in cusp-fold template coordinates (time reversal):
/// c = alpha, alpha000 = 1, beta000 = beta, gamma100 = 1, gamma010 = b.
NormalFormSystem to_normal_form(const ToyParams& p);

/// Below-side crossing map P-: linear, involutive.
Vec2 p_minus(const ToyParams& p, double x0, double y0);
Mat2 p_minus_matrix(const ToyParams& p);

/// Above-side map P+ at explicit flight time, plus the flight residual
/// g(t, x1, y1) = -t^2 - 3t(x1+alpha) - 6y1 whose root is the flight time.
Vec2 p_plus(const ToyParams& p, double t, double x1, double y1);
double flight_residual(const ToyParams& p, double t, double x1, double y1);

struct ClcFamilyPoint {
  double t;
  double x0, y0, x1, y1;
  double alpha_of_t;
};

/// Analytic one-parameter CLC family; 0 < t <= 6*beta (t = 6*beta is the
/// polycycle endpoint). Self-consistency of the three defining equations is
/// asserted to 1e-12.
ClcFamilyPoint clc_family(const ToyParams& p, double t);

double alpha_of_t(const ToyParams& p, double t);

/// Inverts alpha(t) on the monotone branch by bisection (uniform in b,
/// including b ~ 0 where the quadratic formula degenerates).
double t_of_alpha(const ToyParams& p, double alpha);

struct BifurcationCurves {
  double alpha_TS;    // CLC birth at the T-singularity: alpha = beta
  double alpha_poly;  // fold-regular polycycle: alpha = beta(1+3 b beta)
  double alpha_flip;  // eigenvalue -1: alpha = beta(1-b beta)/2
  bool flip_meaningful;  // b < 0 and -1/(7b) < beta < -1/b
};

BifurcationCurves bifurcation_curves(double beta, double b);

enum class ClcStabilityClass { Saddle, StableFocusNode, FlipBoundary, NonHyperbolic };
const char* to_string(ClcStabilityClass c);

struct ClcStability {
  double delta;  // det J, closed form 1 - 2t/(t+6 beta)
  double tau;    // trace J from the assembled Jacobian
  double delta_num;
  Mat2 J;
  ClcStabilityClass cls;
};

/// Return-map Jacobian at the family fixed point, assembled from
/// DP+ (with the flight-time correction) times DP-.
ClcStability clc_stability(const ToyParams& p, double t);

struct PolycycleSolve {
  Vec2 x0, x1;
  double alpha;
  int iters;
};

/// Newton detection of the fold-regular polycycle: unknowns (x0, y0, alpha),
/// conditions P-(x0,y0) lands on S_X and the cusp-side arc closes up.
/// Uses the closed-form maps with the flight root continued through y1 = 0.
PolycycleSolve solve_polycycle(double b, double beta, double alpha_seed,
                               Vec2 x0_seed);

}  // namespace fillab::toy
