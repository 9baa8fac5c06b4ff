#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

#include "langevin/potentials.hpp"
#include "langevin/samplers.hpp"

namespace langevin {

// Spectral-norm distance between the sample mean of psi(x) = xx' over the
// first k coordinates and its reference expectation.
struct MomentErrorReport {
  Eigen::MatrixXd empirical_psi;
  Eigen::MatrixXd reference_psi;
  double error = 0.0;
  std::int64_t n_samples = 0;
  std::uint64_t cost_units = 0;  // filled by the caller that owns the ledger
};

// samples: N x d matrix of final positions, one row per trial.
MomentErrorReport moment_error(const Eigen::MatrixXd& samples,
                               const Eigen::MatrixXd& reference, int k);

// Same report when the empirical mean of psi is already accumulated.
MomentErrorReport moment_error_from_mean(Eigen::MatrixXd empirical_psi,
                                         Eigen::MatrixXd reference_psi,
                                         std::int64_t n_samples);

// E xx' over the head block of the product target: (G'G)^{-1}.
Eigen::MatrixXd reference_second_moment(const ProductExperimentTarget& target);

// |x - x*|^2 + |x - x* + v|^2 + 1, the chain's geometric-drift diagnostic.
double lyapunov(const PhaseState& state, const Eigen::VectorXd& x_star);

// Largest absolute eigenvalue of a symmetric matrix via power iteration on
// M*M (immune to +/- extreme-eigenvalue ties), deterministic start vector,
// relative tolerance 1e-10. The input is symmetrized defensively.
double spectral_norm(const Eigen::MatrixXd& m);

// JSON serialization of a report: {error, n_samples, cost_units, seed,
// config_hash}.
std::string moment_error_report_json(const MomentErrorReport& report,
                                     std::uint64_t seed,
                                     std::uint64_t config_hash);

}  // namespace langevin
