#include "langevin/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace langevin {

const char* algorithm_name(Algorithm a) {
  return a == Algorithm::ULMC ? "ulmc" : "rc-ulmc";
}

CoordinateSchedule::CoordinateSchedule(Eigen::VectorXd phi, double h_base)
    : phi_(std::move(phi)), h_base_(h_base) {
  const int d = static_cast<int>(phi_.size());
  if (d < 1) throw std::invalid_argument("CoordinateSchedule: empty phi");
  if (!(h_base > 0.0)) {
    throw std::invalid_argument("CoordinateSchedule: h_base must be > 0");
  }
  if (!phi_.allFinite() || phi_.minCoeff() <= 0.0) {
    throw std::invalid_argument("CoordinateSchedule: phi must be positive");
  }
  phi_ /= phi_.sum();
  min_phi_ = phi_.minCoeff();
  h_coord_ = (h_base / phi_.array()).matrix();

  // Vose alias construction. Leftover bins from either worklist keep
  // accept = 1 with a self-alias, absorbing the roundoff in sum(phi).
  accept_.assign(d, 1.0);
  alias_.resize(d);
  std::iota(alias_.begin(), alias_.end(), 0);
  std::vector<double> q(d);
  for (int i = 0; i < d; ++i) q[i] = phi_[i] * d;
  std::vector<int> small, large;
  for (int i = 0; i < d; ++i) (q[i] < 1.0 ? small : large).push_back(i);
  while (!small.empty() && !large.empty()) {
    const int s = small.back();
    small.pop_back();
    const int l = large.back();
    large.pop_back();
    accept_[s] = q[s];
    alias_[s] = l;
    q[l] = (q[l] + q[s]) - 1.0;
    (q[l] < 1.0 ? small : large).push_back(l);
  }
}

CoordinateSchedule CoordinateSchedule::uniform(int d, double h_base) {
  return CoordinateSchedule(Eigen::VectorXd::Constant(d, 1.0 / d), h_base);
}

Eigen::VectorXd optimal_phi(const Eigen::VectorXd& coord_L) {
  if (coord_L.size() < 1 || !coord_L.allFinite() || coord_L.minCoeff() <= 0.0) {
    throw std::invalid_argument("optimal_phi: coordinate constants must be positive");
  }
  Eigen::VectorXd w(coord_L.size());
  for (int i = 0; i < coord_L.size(); ++i) {
    const double c = std::cbrt(coord_L[i]);
    w[i] = c * c;
  }
  return w / w.sum();
}

StepsizeReport validate_stepsize(const TargetPotential& target,
                                 const SamplerConfig& config, Algorithm algo) {
  const double mu = target.mu();
  const double big_L = target.big_L();
  StepsizeReport r;
  r.algorithm = algo;
  if (!(config.gamma > 0.0) || !(config.h > 0.0)) {
    r.checks.push_back({"gamma > 0 and h > 0", 0.0,
                        std::min(config.gamma, config.h), false});
    r.all_pass = false;
    r.binding = r.checks.back().name;
    return r;
  }
  double h = config.h;
  if (algo == Algorithm::ULMC) {
    const double gb = 4.0 / (mu + big_L);
    const double hb = std::sqrt(config.gamma) * mu / (8.0 * big_L);
    r.checks.push_back(
        {"gamma <= 4/(mu+L)", gb, config.gamma, config.gamma <= gb});
    r.checks.push_back({"h <= sqrt(gamma)*mu/(8L)", hb, h, h <= hb});
  } else {
    const double min_phi = config.schedule ? config.schedule->min_phi()
                                           : 1.0 / target.dim();
    if (config.schedule) h = config.schedule->h_base();
    const double gb = 1.0 / big_L;
    const double hb = config.gamma * mu * min_phi / 240.0;
    r.checks.push_back({"gamma <= 1/L", gb, config.gamma, config.gamma <= gb});
    r.checks.push_back({"h <= gamma*mu*min(phi)/240", hb, h, h <= hb});
  }
  r.all_pass = true;
  double worst = -1.0;
  for (const auto& c : r.checks) {
    r.all_pass = r.all_pass && c.pass;
    const double ratio = c.value / c.bound;
    if (ratio > worst) {
      worst = ratio;
      r.binding = c.name;
    }
  }
  return r;
}

namespace {

void require_admissible(const TargetPotential& target,
                        const SamplerConfig& config, Algorithm algo) {
  const StepsizeReport rep = validate_stepsize(target, config, algo);
  if (!rep.all_pass) {
    throw std::invalid_argument(std::string(algorithm_name(algo)) +
                                ": inadmissible configuration, violated " +
                                rep.binding);
  }
}

// One coordinate's exact conditional-Gaussian move given its partial
// derivative and a fresh normal pair.
inline void apply_coordinate(PhaseState& state, int i, double g,
                             const StepMoments& m, const CholeskyPair& c,
                             Xoshiro256pp& rng) {
  const auto [z1, z2] = rng.normal_pair();
  const double mx =
      state.x[i] + m.coef_x_on_v * state.v[i] - m.coef_x_on_grad * g;
  const double mv = m.coef_v_decay * state.v[i] - m.coef_v_on_grad * g;
  state.x[i] = mx + c.l11 * z1;
  state.v[i] = mv + c.l21 * z1 + c.l22 * z2;
}

inline void ulmc_advance(PhaseState& state, const TargetPotential& target,
                         const StepMoments& m, const CholeskyPair& c, double h,
                         Eigen::VectorXd& g, Xoshiro256pp& rng) {
  target.full_grad(state.x, g, state.cost_units);
  const int d = target.dim();
  for (int i = 0; i < d; ++i) apply_coordinate(state, i, g[i], m, c, rng);
  state.elapsed_time += h;
  state.iter += 1;
}

inline void rc_advance(PhaseState& state, const TargetPotential& target,
                       const CoordinateSchedule& sched, const StepMoments* m,
                       const CholeskyPair* c, Xoshiro256pp& rng) {
  const int r = sched.draw(rng);
  const double g = target.partial_grad(r, state.x, state.cost_units);
  apply_coordinate(state, r, g, m[r], c[r], rng);
  state.elapsed_time += sched.h_coord()[r];
  state.iter += 1;
}

}  // namespace

void ulmc_step(PhaseState& state, const TargetPotential& target,
               const SamplerConfig& config, Xoshiro256pp& rng) {
  if (state.x.size() != target.dim() || state.v.size() != target.dim()) {
    throw std::invalid_argument("ulmc_step: state dimension mismatch");
  }
  if (config.strict_admissibility) {
    require_admissible(target, config, Algorithm::ULMC);
  }
  const StepMoments m = step_moments(config.h, config.gamma);
  const CholeskyPair c = cholesky2x2(m);
  Eigen::VectorXd g(target.dim());
  ulmc_advance(state, target, m, c, config.h, g, rng);
}

void rc_ulmc_step(PhaseState& state, const TargetPotential& target,
                  const SamplerConfig& config, Xoshiro256pp& rng) {
  if (!config.schedule) {
    throw std::invalid_argument("rc_ulmc_step: config.schedule is required");
  }
  const CoordinateSchedule& sched = *config.schedule;
  if (state.x.size() != target.dim() || state.v.size() != target.dim() ||
      sched.dim() != target.dim()) {
    throw std::invalid_argument("rc_ulmc_step: dimension mismatch");
  }
  if (config.strict_admissibility) {
    require_admissible(target, config, Algorithm::RC_ULMC);
  }
  const int r = sched.draw(rng);
  const double g = target.partial_grad(r, state.x, state.cost_units);
  const StepMoments m = step_moments(sched.h_coord()[r], config.gamma);
  const CholeskyPair c = cholesky2x2(m);
  apply_coordinate(state, r, g, m, c, rng);
  state.elapsed_time += sched.h_coord()[r];
  state.iter += 1;
}

namespace {

void fill_normal(Eigen::Ref<Eigen::VectorXd> out, double mean, double stddev,
                 Xoshiro256pp& rng) {
  const int n = static_cast<int>(out.size());
  for (int i = 0; i < n; i += 2) {
    const auto [z1, z2] = rng.normal_pair();
    out[i] = mean + stddev * z1;
    if (i + 1 < n) out[i + 1] = mean + stddev * z2;
  }
}

}  // namespace

PhaseState draw_initial(const InitSpec& init, const TargetPotential& target,
                        double gamma, Xoshiro256pp& rng) {
  const int d = target.dim();
  PhaseState state;
  state.x.setZero(d);
  state.v.setZero(d);
  const double vsd = init.v_stddev < 0.0 ? std::sqrt(gamma) : init.v_stddev;
  switch (init.kind) {
    case InitSpec::Kind::Zero:
      break;
    case InitSpec::Kind::Point:
      if (init.x0.size() != d || init.v0.size() != d) {
        throw std::invalid_argument("draw_initial: x0/v0 dimension mismatch");
      }
      state.x = init.x0;
      state.v = init.v0;
      break;
    case InitSpec::Kind::Normal:
      fill_normal(state.x, init.shift, 1.0, rng);
      fill_normal(state.v, 0.0, vsd, rng);
      break;
    case InitSpec::Kind::TargetHeadShifted: {
      const auto* prod = dynamic_cast<const ProductExperimentTarget*>(&target);
      if (!prod) {
        throw std::invalid_argument(
            "draw_initial: TargetHeadShifted requires the product target");
      }
      const int k = ProductExperimentTarget::kHeadDim;
      Eigen::VectorXd z(k);
      fill_normal(z, 0.0, 1.0, rng);
      Eigen::LLT<Eigen::MatrixXd> llt(prod->head_precision());
      if (llt.info() != Eigen::Success) {
        throw std::runtime_error("draw_initial: head precision not PD");
      }
      // U^{-1} z has covariance (U'U)^{-1} = (G'G)^{-1}.
      state.x.head(k) =
          Eigen::VectorXd::Constant(k, init.shift) + llt.matrixU().solve(z);
      fill_normal(state.x.tail(d - k), 0.0, 1.0, rng);
      fill_normal(state.v, 0.0, vsd, rng);
      break;
    }
  }
  return state;
}

PhaseState run_chain(const TargetPotential& target, const SamplerConfig& config,
                     Algorithm algo, std::uint64_t n_iters,
                     const InitSpec& init, const ChainCallbacks* callbacks) {
  if (config.strict_admissibility) require_admissible(target, config, algo);
  Xoshiro256pp rng(config.rng_seed);
  PhaseState state = draw_initial(init, target, config.gamma, rng);

  const int d = target.dim();
  const bool has_cp = callbacks && callbacks->on_checkpoint &&
                      !callbacks->cost_checkpoints.empty();
  const bool has_iter =
      callbacks && callbacks->on_iter && callbacks->iter_stride > 0;
  std::size_t next_cp = 0;
  auto fire_before = [&](std::uint64_t step_cost) {
    while (has_cp && next_cp < callbacks->cost_checkpoints.size() &&
           state.cost_units + step_cost >
               callbacks->cost_checkpoints[next_cp]) {
      callbacks->on_checkpoint(state, next_cp);
      ++next_cp;
    }
  };

  if (algo == Algorithm::ULMC) {
    const StepMoments m = step_moments(config.h, config.gamma);
    const CholeskyPair c = cholesky2x2(m);
    Eigen::VectorXd g(d);
    for (std::uint64_t it = 0; it < n_iters; ++it) {
      fire_before(static_cast<std::uint64_t>(d));
      ulmc_advance(state, target, m, c, config.h, g, rng);
      if (has_iter && state.iter % callbacks->iter_stride == 0) {
        callbacks->on_iter(state);
      }
    }
  } else {
    const CoordinateSchedule sched =
        config.schedule ? *config.schedule
                        : CoordinateSchedule::uniform(d, config.h);
    if (sched.dim() != d) {
      throw std::invalid_argument("run_chain: schedule dimension mismatch");
    }
    std::vector<StepMoments> m(d);
    std::vector<CholeskyPair> c(d);
    for (int i = 0; i < d; ++i) {
      m[i] = step_moments(sched.h_coord()[i], config.gamma);
      c[i] = cholesky2x2(m[i]);
    }
    for (std::uint64_t it = 0; it < n_iters; ++it) {
      fire_before(1);
      rc_advance(state, target, sched, m.data(), c.data(), rng);
      if (has_iter && state.iter % callbacks->iter_stride == 0) {
        callbacks->on_iter(state);
      }
    }
  }
  // Thresholds landing exactly on the final cost fire with the final state;
  // anything past it never fires.
  while (has_cp && next_cp < callbacks->cost_checkpoints.size() &&
         callbacks->cost_checkpoints[next_cp] <= state.cost_units) {
    callbacks->on_checkpoint(state, next_cp);
    ++next_cp;
  }
  return state;
}

}  // namespace langevin
