#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "langevin/kernel.hpp"
#include "langevin/potentials.hpp"
#include "langevin/rng.hpp"

namespace langevin {

enum class Algorithm { ULMC, RC_ULMC };

const char* algorithm_name(Algorithm a);

struct PhaseState {
  Eigen::VectorXd x;
  Eigen::VectorXd v;
  double elapsed_time = 0.0;           // sum of per-step dynamical stepsizes
  std::uint64_t iter = 0;
  CostLedger cost_units = 0;           // partial-derivative evaluations
};

// Coordinate distribution phi with per-coordinate stepsizes
// h_coord[i] = h_base / phi[i], plus a Vose alias table so a categorical
// draw costs one uniform: u*d is split into an index and a coin.
class CoordinateSchedule {
 public:
  CoordinateSchedule(Eigen::VectorXd phi, double h_base);
  static CoordinateSchedule uniform(int d, double h_base);

  int dim() const { return static_cast<int>(phi_.size()); }
  double h_base() const { return h_base_; }
  const Eigen::VectorXd& phi() const { return phi_; }
  const Eigen::VectorXd& h_coord() const { return h_coord_; }
  double min_phi() const { return min_phi_; }

  int draw(Xoshiro256pp& rng) const {
    const double u = rng.uniform01() * dim();
    const int k = static_cast<int>(u);
    return (u - k) < accept_[k] ? k : alias_[k];
  }

 private:
  Eigen::VectorXd phi_;
  Eigen::VectorXd h_coord_;
  double h_base_;
  double min_phi_;
  std::vector<double> accept_;
  std::vector<int> alias_;
};

// phi_i = L_i^{2/3} / sum_j L_j^{2/3}, the schedule minimizing
// sum_i kappa_i^2 / phi_i^2 over the simplex. Throws on nonpositive entries.
Eigen::VectorXd optimal_phi(const Eigen::VectorXd& coord_L);

struct SamplerConfig {
  double gamma = 1.0;
  double h = 0.0;                               // ULMC stepsize / RC expected stepsize
  std::optional<CoordinateSchedule> schedule;   // RC-ULMC only
  std::uint64_t rng_seed = 0;
  bool strict_admissibility = false;
};

struct BoundCheck {
  std::string name;    // human-readable bound, e.g. "gamma <= 4/(mu+L)"
  double bound;
  double value;
  bool pass;
};

struct StepsizeReport {
  Algorithm algorithm;
  std::vector<BoundCheck> checks;
  bool all_pass = false;
  std::string binding;  // name of the tightest failing/binding constraint
};

// Admissibility of (gamma, h) for the given algorithm:
//   ULMC:    gamma <= 4/(mu+L)      and h <= gamma^{1/2} mu / (8L)
//   RC-ULMC: gamma <= 1/L           and h <= gamma mu min_i phi_i / 240
StepsizeReport validate_stepsize(const TargetPotential& target,
                                 const SamplerConfig& config, Algorithm algo);

// One full-vector step: one full gradient at the current position, then every
// coordinate moves by its exact conditional Gaussian with an independent
// noise pair. cost += d, elapsed_time += h. In strict mode an inadmissible
// (gamma, h) throws, naming the violated bound.
void ulmc_step(PhaseState& state, const TargetPotential& target,
               const SamplerConfig& config, Xoshiro256pp& rng);

// One random-coordinate step: draw r from the schedule, update coordinate r
// with stepsize h_coord[r] using one partial derivative; all other
// coordinates are untouched. cost += 1, elapsed_time += h_coord[r].
void rc_ulmc_step(PhaseState& state, const TargetPotential& target,
                  const SamplerConfig& config, Xoshiro256pp& rng);

struct InitSpec {
  enum class Kind {
    Zero,              // x = v = 0
    Normal,            // x ~ N(shift*1, I), v ~ N(0, v_stddev^2 I)
    TargetHeadShifted, // product target: head ~ N(shift*1, (G'G)^{-1}),
                       // tail ~ N(0, I), v ~ N(0, v_stddev^2 I)
    Point,             // x = x0, v = v0
  };
  Kind kind = Kind::Normal;
  double shift = 0.0;
  double v_stddev = -1.0;  // negative: use sqrt(gamma) (stationary velocity)
  Eigen::VectorXd x0, v0;
};

PhaseState draw_initial(const InitSpec& init, const TargetPotential& target,
                        double gamma, Xoshiro256pp& rng);

struct ChainCallbacks {
  // Cost thresholds (strictly increasing). The callback fires at the last
  // state whose cost does not exceed the threshold, i.e. exactly at the
  // threshold for RC-ULMC and at the nearest-not-exceeding multiple of d for
  // ULMC. Thresholds beyond the chain's final cost never fire.
  std::vector<std::uint64_t> cost_checkpoints;
  std::function<void(const PhaseState&, std::size_t)> on_checkpoint;

  // Fires after every `iter_stride`-th iteration when nonzero.
  std::uint64_t iter_stride = 0;
  std::function<void(const PhaseState&)> on_iter;
};

// Runs n_iters steps from a fresh chain: the RNG is seeded with
// config.rng_seed, the initial state is drawn from `init`, and the whole
// trajectory is a pure function of (config, init, n_iters).
PhaseState run_chain(const TargetPotential& target, const SamplerConfig& config,
                     Algorithm algo, std::uint64_t n_iters,
                     const InitSpec& init,
                     const ChainCallbacks* callbacks = nullptr);

}  // namespace langevin
