#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace langevin {

// Exactly propagated chain law, mean and covariance of the stacked vector
// (x; v) in R^{2d}.
struct GaussianLaw {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  int dim() const { return static_cast<int>(mean.size()) / 2; }
};

// Stationary law of the dynamics on f(x) = x'Ax/2: x ~ N(0, A^{-1}),
// v ~ N(0, gamma I), independent.
GaussianLaw ulmc_stationary_law(const Eigen::MatrixXd& a, double gamma);

// One exact full-vector step on the quadratic target f(x) = x'Ax/2. The step
// is affine-Gaussian: law' = (M mean, M cov M' + Q) with
//   M = [ I - coef_x_on_grad*A   coef_x_on_v*I  ]
//       [    - coef_v_on_grad*A  coef_v_decay*I ]
//   Q = [ var_x*I   cov_xv*I ]
//       [ cov_xv*I  var_v*I  ]
GaussianLaw propagate_ulmc_gaussian(const GaussianLaw& law,
                                    const Eigen::MatrixXd& a, double h,
                                    double gamma);

// Aggregated second moments of a random-coordinate chain on the standard
// Gaussian with uniform schedule and gamma = 1, where w = x + v:
// ex2 = E|x|^2, exw = E<x, w>, ew2 = E|w|^2.
struct MomentTriple {
  double ex2;
  double exw;
  double ew2;
};

// Initial moments for a chain started at x ~ N(s*1, I), v ~ N(0, I).
MomentTriple shifted_init_moments(int d, double shift);

// Exact one-step update of the triple under the random-coordinate chain with
// uniform schedule on the standard Gaussian at gamma = 1 (per-coordinate
// stepsize d*h). Valid for any initial law with finite second moments; uses
// exact exponentials, no Taylor remainder.
MomentTriple rc_second_moment_step(const MomentTriple& m, int d, double h);

// Squared 2-Wasserstein distance between Gaussians:
//   W2^2 = |m1 - m2|^2 + tr(c1 + c2 - 2 (c2^{1/2} c1 c2^{1/2})^{1/2}).
// Eigenvalues within -1e-10*trace of zero are clamped; worse throws.
double gaussian_w2(const Eigen::VectorXd& mean1, const Eigen::MatrixXd& cov1,
                   const Eigen::VectorXd& mean2, const Eigen::MatrixXd& cov2);
double gaussian_w2(const GaussianLaw& a, const GaussianLaw& b);

// Distance lower bound exp(-4hm)/800^2 * d/8 + d^{3/2} h / (320 - 464 d h)
// for the uniform random-coordinate chain on the standard Gaussian started
// from the 1/400-shifted Gaussian. Requires d*h <= 1e-8 (the smallness regime
// of the bound; the boundary is included since the derivation holds there).
double prop5_lower_bound(int d, double h, std::uint64_t m);

// max(0, sqrt(ew2) - sqrt(2d)): a certified lower bound on W2 between the
// (x, w) law and its target, whose stationary second moment is E|w|^2 = 2d.
double second_moment_w2_lower_bound(double ew2, int d);

// Contraction bound for the random-coordinate chain:
//   4 exp(-mu*gamma*m*h/8) W0 + 40 gamma^{1/2} h sqrt(sum_i kappa_i^2/phi_i^2)
double theorem3_rhs(double w0, std::uint64_t m, double h, double gamma,
                      double mu, const Eigen::VectorXd& kappa_vec,
                      const Eigen::VectorXd& phi);

// Contraction bound for the full-vector chain:
//   sqrt(2) exp(-0.375 mu h gamma^{1/2} m) W0 + (2d)^{1/2} kappa h
double theorem_ulmc_rhs(double w0, std::uint64_t m, double h, double gamma,
                        double mu, double kappa, int d);

}  // namespace langevin
