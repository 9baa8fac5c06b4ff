#include "langevin/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace langevin {

MomentErrorReport moment_error(const Eigen::MatrixXd& samples,
                               const Eigen::MatrixXd& reference, int k) {
  if (samples.rows() < 1 || samples.cols() < k || reference.rows() != k ||
      reference.cols() != k) {
    throw std::invalid_argument("moment_error: dimension mismatch");
  }
  const auto head = samples.leftCols(k);
  Eigen::MatrixXd psi =
      (head.transpose() * head) / static_cast<double>(samples.rows());
  return moment_error_from_mean(std::move(psi), reference, samples.rows());
}

MomentErrorReport moment_error_from_mean(Eigen::MatrixXd empirical_psi,
                                         Eigen::MatrixXd reference_psi,
                                         std::int64_t n_samples) {
  if (empirical_psi.rows() != reference_psi.rows() ||
      empirical_psi.cols() != reference_psi.cols()) {
    throw std::invalid_argument("moment_error: dimension mismatch");
  }
  MomentErrorReport r;
  r.error = spectral_norm(empirical_psi - reference_psi);
  r.empirical_psi = std::move(empirical_psi);
  r.reference_psi = std::move(reference_psi);
  r.n_samples = n_samples;
  return r;
}

Eigen::MatrixXd reference_second_moment(const ProductExperimentTarget& target) {
  const Eigen::MatrixXd& p = target.head_precision();
  Eigen::LLT<Eigen::MatrixXd> llt(p);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("reference_second_moment: head precision not PD");
  }
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(p.rows(), p.cols()));
  return 0.5 * (inv + inv.transpose().eval());
}

double lyapunov(const PhaseState& state, const Eigen::VectorXd& x_star) {
  if (state.x.size() != x_star.size()) {
    throw std::invalid_argument("lyapunov: dimension mismatch");
  }
  const Eigen::VectorXd dx = state.x - x_star;
  return dx.squaredNorm() + (dx + state.v).squaredNorm() + 1.0;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw std::invalid_argument("spectral_norm: matrix must be square");
  }
  if (!m.allFinite()) {
    throw std::invalid_argument("spectral_norm: non-finite entries");
  }
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  // Power iteration on sym^2: squaring folds a +/- extreme-eigenvalue pair
  // into one dominant eigenvalue, so the Rayleigh quotient still converges.
  const Eigen::MatrixXd sq = sym * sym;
  const int n = static_cast<int>(sym.rows());
  Eigen::VectorXd q(n);
  for (int i = 0; i < n; ++i) q[i] = 1.0 + static_cast<double>(i) / (10.0 * n);
  q.normalize();
  double lam = 0.0;
  for (int it = 0; it < 100000; ++it) {
    Eigen::VectorXd z = sq * q;
    const double norm = z.norm();
    if (norm == 0.0) return 0.0;
    q = z / norm;
    const double next = q.dot(sq * q);
    if (std::abs(next - lam) <= 1e-10 * std::max(std::abs(next), 1e-300)) {
      lam = next;
      break;
    }
    lam = next;
  }
  return std::sqrt(std::max(lam, 0.0));
}

std::string moment_error_report_json(const MomentErrorReport& report,
                                     std::uint64_t seed,
                                     std::uint64_t config_hash) {
  nlohmann::json j;
  j["error"] = report.error;
  j["n_samples"] = report.n_samples;
  j["cost_units"] = report.cost_units;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  return j.dump(2);
}

}  // namespace langevin
