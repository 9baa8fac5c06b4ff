#include "langevin/oracles.hpp"

#include <cmath>
#include <stdexcept>

#include "langevin/kernel.hpp"

namespace langevin {

namespace {

// Square root of a symmetric PSD matrix. Eigenvalues within tol of zero are
// clamped; anything more negative means the input was not a covariance.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, const char* who) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error(std::string(who) + ": eigensolver failed");
  }
  const double tol = 1e-10 * std::abs(sym.trace());
  Eigen::VectorXd lam = es.eigenvalues();
  for (int i = 0; i < lam.size(); ++i) {
    if (lam[i] < -tol) {
      throw std::invalid_argument(std::string(who) +
                                  ": matrix is not positive semidefinite");
    }
    lam[i] = std::sqrt(std::max(lam[i], 0.0));
  }
  return es.eigenvectors() * lam.asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

GaussianLaw ulmc_stationary_law(const Eigen::MatrixXd& a, double gamma) {
  const int d = static_cast<int>(a.rows());
  if (a.cols() != d || !(gamma > 0.0)) {
    throw std::invalid_argument("ulmc_stationary_law: bad arguments");
  }
  GaussianLaw law;
  law.mean = Eigen::VectorXd::Zero(2 * d);
  law.cov = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (a + a.transpose()));
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("ulmc_stationary_law: matrix not PD");
  }
  Eigen::MatrixXd ainv =
      llt.solve(Eigen::MatrixXd::Identity(d, d));
  law.cov.topLeftCorner(d, d) = 0.5 * (ainv + ainv.transpose());
  law.cov.bottomRightCorner(d, d) =
      gamma * Eigen::MatrixXd::Identity(d, d);
  return law;
}

GaussianLaw propagate_ulmc_gaussian(const GaussianLaw& law,
                                    const Eigen::MatrixXd& a, double h,
                                    double gamma) {
  const int d = static_cast<int>(a.rows());
  if (a.cols() != d || law.mean.size() != 2 * d ||
      law.cov.rows() != 2 * d || law.cov.cols() != 2 * d) {
    throw std::invalid_argument("propagate_ulmc_gaussian: dimension mismatch");
  }
  const StepMoments m = step_moments(h, gamma);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd big_m(2 * d, 2 * d);
  big_m.topLeftCorner(d, d) = eye - m.coef_x_on_grad * a;
  big_m.topRightCorner(d, d) = m.coef_x_on_v * eye;
  big_m.bottomLeftCorner(d, d) = -m.coef_v_on_grad * a;
  big_m.bottomRightCorner(d, d) = m.coef_v_decay * eye;

  GaussianLaw out;
  out.mean = big_m * law.mean;
  out.cov = big_m * law.cov * big_m.transpose();
  out.cov.topLeftCorner(d, d) += m.var_x * eye;
  out.cov.topRightCorner(d, d) += m.cov_xv * eye;
  out.cov.bottomLeftCorner(d, d) += m.cov_xv * eye;
  out.cov.bottomRightCorner(d, d) += m.var_v * eye;
  out.cov = 0.5 * (out.cov + out.cov.transpose().eval());
  return out;
}

MomentTriple shifted_init_moments(int d, double shift) {
  MomentTriple t;
  t.ex2 = d * (shift * shift + 1.0);
  t.exw = t.ex2;
  t.ew2 = d * (shift * shift + 2.0);
  return t;
}

MomentTriple rc_second_moment_step(const MomentTriple& m, int d, double h) {
  if (d < 1 || !(h > 0.0)) {
    throw std::invalid_argument("rc_second_moment_step: bad arguments");
  }
  // Per-coordinate stepsize d*h under the uniform schedule at gamma = 1.
  // In (x, w) = (x, x + v) coordinates the updated coordinate maps to
  //   x' = a_x x + b_x w + noise_x,  w' = a_w x + b_w w + noise_w,
  // and each iteration updates one uniformly chosen coordinate, so every
  // aggregate picks up the in-place branch with weight 1/d and the noise
  // exactly once.
  const StepMoments k = step_moments(d * h, 1.0);
  const double ax = 1.0 - k.coef_x_on_grad - k.coef_x_on_v;
  const double bx = k.coef_x_on_v;
  const double aw = -k.coef_x_on_grad;
  const double bw = k.coef_x_on_v + k.coef_v_decay;
  const double nx = k.var_x;
  const double nxw = k.var_x + k.cov_xv;
  const double nw = k.var_x + k.var_v + 2.0 * k.cov_xv;
  const double p = 1.0 / d;
  MomentTriple out;
  out.ex2 = (1.0 - p) * m.ex2 +
            p * (ax * ax * m.ex2 + bx * bx * m.ew2 + 2.0 * ax * bx * m.exw) +
            nx;
  out.exw = (1.0 - p) * m.exw +
            p * (ax * aw * m.ex2 + bx * bw * m.ew2 +
                 (ax * bw + aw * bx) * m.exw) +
            nxw;
  out.ew2 = (1.0 - p) * m.ew2 +
            p * (aw * aw * m.ex2 + bw * bw * m.ew2 + 2.0 * aw * bw * m.exw) +
            nw;
  return out;
}

double gaussian_w2(const Eigen::VectorXd& mean1, const Eigen::MatrixXd& cov1,
                   const Eigen::VectorXd& mean2, const Eigen::MatrixXd& cov2) {
  const auto n = mean1.size();
  if (mean2.size() != n || cov1.rows() != n || cov1.cols() != n ||
      cov2.rows() != n || cov2.cols() != n) {
    throw std::invalid_argument("gaussian_w2: dimension mismatch");
  }
  const Eigen::MatrixXd root2 = psd_sqrt(cov2, "gaussian_w2");
  const Eigen::MatrixXd cross = psd_sqrt(root2 * cov1 * root2, "gaussian_w2");
  const double sq = (mean1 - mean2).squaredNorm() + cov1.trace() +
                    cov2.trace() - 2.0 * cross.trace();
  return std::sqrt(std::max(sq, 0.0));
}

double gaussian_w2(const GaussianLaw& a, const GaussianLaw& b) {
  return gaussian_w2(a.mean, a.cov, b.mean, b.cov);
}

double prop5_lower_bound(int d, double h, std::uint64_t m) {
  if (d < 1 || !(h > 0.0)) {
    throw std::invalid_argument("prop5_lower_bound: bad arguments");
  }
  if (d * h > 1e-8) {
    throw std::invalid_argument(
        "prop5_lower_bound: requires d*h <= 1e-8");
  }
  const double decay = std::exp(-4.0 * h * static_cast<double>(m));
  return decay / (800.0 * 800.0) * (d / 8.0) +
         std::pow(static_cast<double>(d), 1.5) * h / (320.0 - 464.0 * d * h);
}

double second_moment_w2_lower_bound(double ew2, int d) {
  if (ew2 < 0.0 || d < 1) {
    throw std::invalid_argument("second_moment_w2_lower_bound: bad arguments");
  }
  return std::max(0.0, std::sqrt(ew2) - std::sqrt(2.0 * d));
}

double theorem3_rhs(double w0, std::uint64_t m, double h, double gamma,
                      double mu, const Eigen::VectorXd& kappa_vec,
                      const Eigen::VectorXd& phi) {
  if (kappa_vec.size() != phi.size()) {
    throw std::invalid_argument("theorem3_rhs: dimension mismatch");
  }
  const double var_sum =
      (kappa_vec.array() / phi.array()).square().sum();
  return 4.0 * std::exp(-mu * gamma * static_cast<double>(m) * h / 8.0) * w0 +
         40.0 * std::sqrt(gamma) * h * std::sqrt(var_sum);
}

double theorem_ulmc_rhs(double w0, std::uint64_t m, double h, double gamma,
                        double mu, double kappa, int d) {
  return std::sqrt(2.0) *
             std::exp(-0.375 * mu * h * std::sqrt(gamma) *
                      static_cast<double>(m)) *
             w0 +
         std::sqrt(2.0 * d) * kappa * h;
}

}  // namespace langevin
