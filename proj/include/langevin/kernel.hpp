#pragma once

#include <utility>

namespace langevin {

// Conditional Gaussian moments of one exact Euler/OU step of length h for the
// dynamics dx = v dt, dv = -2 v dt - gamma*g dt + sqrt(4 gamma) dB with the
// gradient g frozen at the step start:
//
//   E x'  = x + coef_x_on_v * v - coef_x_on_grad * g
//   E v'  = coef_v_decay * v - coef_v_on_grad * g
//   Var x' = var_x,  Var v' = var_v,  Cov(x', v') = cov_xv
//
// where
//   coef_x_on_v    = (1 - e^{-2h}) / 2
//   coef_x_on_grad = (gamma/2) (h - (1 - e^{-2h}) / 2)
//   coef_v_decay   = e^{-2h}
//   coef_v_on_grad = (gamma/2) (1 - e^{-2h})
//   var_x          = gamma [h - 3/4 - e^{-4h}/4 + e^{-2h}]
//   var_v          = gamma (1 - e^{-4h})
//   cov_xv         = (gamma/2) (1 - e^{-2h})^2
struct StepMoments {
  double coef_x_on_v;
  double coef_x_on_grad;
  double coef_v_decay;
  double coef_v_on_grad;
  double var_x;
  double var_v;
  double cov_xv;
};

// Lower-triangular factor of the 2x2 step covariance: given independent
// standard normals (z1, z2), (l11*z1, l21*z1 + l22*z2) has the step law.
struct CholeskyPair {
  double l11;
  double l21;
  double l22;
};

// Below this stepsize the naive var_x and coef_x_on_grad closed forms lose
// digits to cancellation, so truncated Taylor series are used instead. The
// crossover is where both branches sit near 1e-13 relative error.
inline constexpr double kMomentSeriesThreshold = 0.05;

// Throws std::invalid_argument if h < 0 or gamma <= 0.
StepMoments step_moments(double h, double gamma);

// Throws std::invalid_argument if the covariance is broken beyond roundoff
// (var_x or var_v negative past tolerance). Determinants negative within
// roundoff are clamped to zero.
CholeskyPair cholesky2x2(const StepMoments& m);

// Conditional mean of (x', v') for one coordinate with partial derivative g.
std::pair<double, double> step_mean(const StepMoments& m, double x, double v,
                                    double g);

}  // namespace langevin
