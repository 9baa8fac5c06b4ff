#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "langevin/kernel.hpp"
#include "langevin/oracles.hpp"
#include "langevin/potentials.hpp"
#include "langevin/rng.hpp"
#include "langevin/samplers.hpp"
#include "support/highprec.hpp"

using namespace langevin;

namespace {

Eigen::MatrixXd random_spd(int d, Xoshiro256pp& rng) {
  Eigen::MatrixXd b(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) b(i, j) = rng.normal_pair().first;
  return b.transpose() * b + 0.1 * Eigen::MatrixXd::Identity(d, d);
}

// Independent reference for the aggregated second-moment recursion: track
// (E x_i^2, E x_i v_i, E v_i^2) of one coordinate through the conditional
// step moments directly, then aggregate. Exchangeability across coordinates
// makes the scalar triple exact.
struct CoordMoments {
  double xx, xv, vv;
};

CoordMoments coord_step(const CoordMoments& m, int d, double h) {
  const StepMoments k = step_moments(d * h, 1.0);
  const double a = 1.0 - k.coef_x_on_grad;  // gradient of |x|^2/2 is x
  const double b = k.coef_x_on_v;
  const double e = -k.coef_v_on_grad;
  const double c = k.coef_v_decay;
  const double p = 1.0 / d;
  CoordMoments out;
  out.xx = (1.0 - p) * m.xx +
           p * (a * a * m.xx + 2.0 * a * b * m.xv + b * b * m.vv + k.var_x);
  out.xv = (1.0 - p) * m.xv +
           p * (a * e * m.xx + (a * c + b * e) * m.xv + b * c * m.vv +
                k.cov_xv);
  out.vv = (1.0 - p) * m.vv +
           p * (e * e * m.xx + 2.0 * e * c * m.xv + c * c * m.vv + k.var_v);
  return out;
}

MomentTriple aggregate(const CoordMoments& m, int d) {
  return {d * m.xx, d * (m.xx + m.xv), d * (m.xx + 2.0 * m.xv + m.vv)};
}

}  // namespace

TEST_CASE("stationary law stacks target and velocity marginals") {
  Eigen::MatrixXd a = Eigen::Vector2d(1.0, 2.0).asDiagonal();
  const GaussianLaw law = ulmc_stationary_law(a, 0.7);
  CHECK(law.dim() == 2);
  CHECK(law.mean.norm() == 0.0);
  Eigen::VectorXd want(4);
  want << 1.0, 0.5, 0.7, 0.7;
  CHECK(law.cov.diagonal().isApprox(want, 1e-14));
  CHECK((law.cov - Eigen::MatrixXd(law.cov.diagonal().asDiagonal())).norm() ==
        0.0);
}

TEST_CASE("zero stepsize propagation is the identity") {
  Xoshiro256pp rng(17);
  const Eigen::MatrixXd a = random_spd(3, rng);
  GaussianLaw law = ulmc_stationary_law(a, 1.3);
  law.mean = Eigen::VectorXd::LinSpaced(6, -1.0, 1.0);
  const GaussianLaw out = propagate_ulmc_gaussian(law, a, 0.0, 1.3);
  CHECK(out.mean.isApprox(law.mean, 1e-15));
  CHECK(out.cov.isApprox(law.cov, 1e-15));
}

TEST_CASE("zero mean is preserved by propagation") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
  GaussianLaw law = ulmc_stationary_law(a, 1.0);
  for (int i = 0; i < 5; ++i) law = propagate_ulmc_gaussian(law, a, 0.07, 1.0);
  CHECK(law.mean.norm() == 0.0);
}

TEST_CASE("one-step propagation of a point matches the scalar kernel") {
  Eigen::MatrixXd a(1, 1);
  a << 2.0;
  const double h = 0.03, gamma = 0.8;
  GaussianLaw point;
  point.mean = Eigen::Vector2d(0.3, -0.2);
  point.cov = Eigen::MatrixXd::Zero(2, 2);
  const GaussianLaw out = propagate_ulmc_gaussian(point, a, h, gamma);

  const StepMoments m = step_moments(h, gamma);
  const auto [mx, mv] = step_mean(m, 0.3, -0.2, 2.0 * 0.3);
  CHECK(out.mean[0] == doctest::Approx(mx).epsilon(1e-15));
  CHECK(out.mean[1] == doctest::Approx(mv).epsilon(1e-15));
  CHECK(out.cov(0, 0) == doctest::Approx(m.var_x).epsilon(1e-15));
  CHECK(out.cov(1, 1) == doctest::Approx(m.var_v).epsilon(1e-15));
  CHECK(out.cov(0, 1) == doctest::Approx(m.cov_xv).epsilon(1e-15));

  GaussianLaw wrong = point;
  wrong.mean = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(propagate_ulmc_gaussian(wrong, a, h, gamma),
                  std::invalid_argument);
}

TEST_CASE("propagation fixed point sits within O(h) of the target") {
  Eigen::MatrixXd a(1, 1);
  a << 1.0;
  GaussianLaw law = ulmc_stationary_law(a, 1.0);
  double prev = 0.0;
  for (int i = 0; i < 100000; ++i) {
    prev = law.cov(0, 0);
    law = propagate_ulmc_gaussian(law, a, 0.01, 1.0);
  }
  CHECK(std::abs(law.cov(0, 0) - prev) < 1e-13);
  CHECK(std::abs(law.cov(0, 0) - 1.0) <= 0.05);
}

TEST_CASE("propagated law matches a direct chain ensemble") {
  Eigen::VectorXd diag(3);
  diag << 1.0, 2.0, 4.0;
  const Eigen::MatrixXd a = diag.asDiagonal();
  const QuadraticTarget target(a);
  const double h = 1e-2, gamma = 0.25;
  const int m = 500, n_chains = 20000;

  GaussianLaw law;
  law.mean = Eigen::VectorXd::Zero(6);
  law.mean.head(3) = Eigen::VectorXd::Ones(3);
  law.cov = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < m; ++i) law = propagate_ulmc_gaussian(law, a, h, gamma);

  SamplerConfig cfg;
  cfg.gamma = gamma;
  cfg.h = h;
  InitSpec init;
  init.kind = InitSpec::Kind::Point;
  init.x0 = Eigen::VectorXd::Ones(3);
  init.v0 = Eigen::VectorXd::Zero(3);

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(6);
  Eigen::MatrixXd raw2 = Eigen::MatrixXd::Zero(6, 6);
  for (int t = 0; t < n_chains; ++t) {
    cfg.rng_seed = derive_seed(606, t);
    const PhaseState s = run_chain(target, cfg, Algorithm::ULMC, m, init);
    Eigen::VectorXd z(6);
    z << s.x, s.v;
    mean += z;
    raw2 += z * z.transpose();
  }
  mean /= n_chains;
  raw2 /= n_chains;

  const Eigen::MatrixXd want_raw2 =
      law.cov + law.mean * law.mean.transpose();
  for (int i = 0; i < 6; ++i) {
    const double se = std::sqrt(law.cov(i, i) / n_chains);
    CHECK(std::abs(mean[i] - law.mean[i]) < 4.0 * se);
    for (int j = i; j < 6; ++j) {
      const double var_prod = law.cov(i, i) * law.cov(j, j) +
                              law.cov(i, j) * law.cov(i, j) +
                              law.mean[i] * law.mean[i] * law.cov(j, j) +
                              law.mean[j] * law.mean[j] * law.cov(i, i) +
                              2.0 * law.mean[i] * law.mean[j] * law.cov(i, j);
      const double se2 = std::sqrt(var_prod / n_chains);
      CHECK(std::abs(raw2(i, j) - want_raw2(i, j)) < 4.0 * se2);
    }
  }
}

TEST_CASE("shifted initial moments") {
  const MomentTriple small = shifted_init_moments(3, 2.0);
  CHECK(small.ex2 == doctest::Approx(15.0).epsilon(1e-15));
  CHECK(small.exw == doctest::Approx(15.0).epsilon(1e-15));
  CHECK(small.ew2 == doctest::Approx(18.0).epsilon(1e-15));

  const MomentTriple p5 = shifted_init_moments(10, 1.0 / 400.0);
  CHECK(p5.ex2 == doctest::Approx(10.0 * 160001.0 / 160000.0).epsilon(1e-15));
  CHECK(p5.ew2 == doctest::Approx(10.0 * 320001.0 / 160000.0).epsilon(1e-15));
}

TEST_CASE("second-moment recursion agrees with a per-coordinate rederivation") {
  for (const auto& [d, h, steps] : {std::tuple<int, double, int>{5, 1e-9, 1000},
                                    {10, 1e-3, 200},
                                    {3, 0.02, 150}}) {
    MomentTriple got = shifted_init_moments(d, 1.0 / 400.0);
    CoordMoments ref{got.ex2 / d, 0.0, 1.0};
    for (int i = 0; i < steps; ++i) {
      got = rc_second_moment_step(got, d, h);
      ref = coord_step(ref, d, h);
      const MomentTriple want = aggregate(ref, d);
      CHECK(got.ex2 == doctest::Approx(want.ex2).epsilon(1e-12));
      CHECK(got.exw == doctest::Approx(want.exw).epsilon(1e-12));
      CHECK(got.ew2 == doctest::Approx(want.ew2).epsilon(1e-12));
      CHECK(got.ex2 >= 0.0);
      CHECK(got.ew2 >= 0.0);
      CHECK(std::abs(got.exw) <=
            std::sqrt(got.ex2 * got.ew2) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("stationary triple moves only at second order in h") {
  const int d = 5;
  const MomentTriple stat{static_cast<double>(d), static_cast<double>(d),
                          2.0 * d};
  const double h1 = 1e-4, h2 = 5e-5;
  const MomentTriple m1 = rc_second_moment_step(stat, d, h1);
  const MomentTriple m2 = rc_second_moment_step(stat, d, h2);
  const double d1 = std::abs(m1.ew2 - stat.ew2);
  const double d2 = std::abs(m2.ew2 - stat.ew2);
  CHECK(d1 < 1e-5);
  CHECK(d1 / h1 < 100.0 * h1);  // change per step is O(h^2), not O(h)
  CHECK(d2 < 0.3 * d1);         // quartering expected when h halves
}

TEST_CASE("recursion matches a direct chain ensemble on the standard Gaussian") {
  const int d = 5, m = 2000, n_chains = 20000;
  const double h = 1e-3;
  const QuadraticTarget target = standard_gaussian_target(d);

  MomentTriple pred = shifted_init_moments(d, 1.0);
  for (int i = 0; i < m; ++i) pred = rc_second_moment_step(pred, d, h);

  SamplerConfig cfg;
  cfg.gamma = 1.0;
  cfg.h = h;
  InitSpec init;
  init.kind = InitSpec::Kind::Normal;
  init.shift = 1.0;
  init.v_stddev = 1.0;

  double sx = 0, sw = 0, qx = 0, qw = 0;
  for (int t = 0; t < n_chains; ++t) {
    cfg.rng_seed = derive_seed(707, t);
    const PhaseState s = run_chain(target, cfg, Algorithm::RC_ULMC, m, init);
    const double x2 = s.x.squaredNorm();
    const double w2 = (s.x + s.v).squaredNorm();
    sx += x2;
    sw += w2;
    qx += x2 * x2;
    qw += w2 * w2;
  }
  sx /= n_chains;
  sw /= n_chains;
  const double se_x = std::sqrt((qx / n_chains - sx * sx) / n_chains);
  const double se_w = std::sqrt((qw / n_chains - sw * sw) / n_chains);
  CHECK(std::abs(sx - pred.ex2) < 4.0 * se_x);
  CHECK(std::abs(sw - pred.ew2) < 4.0 * se_w);
}

TEST_CASE("gaussian_w2 closed forms") {
  Xoshiro256pp rng(23);
  const Eigen::MatrixXd c = random_spd(16, rng);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(16);
  CHECK(gaussian_w2(zero, c, zero, c) == doctest::Approx(0.0).scale(1.0));

  // Equal covariances leave only the mean shift.
  const Eigen::VectorXd shift = Eigen::VectorXd::Constant(16, 1.0 / 400.0);
  CHECK(gaussian_w2(shift, c, zero, c) ==
        doctest::Approx(0.01).epsilon(1e-6));

  Eigen::MatrixXd s1(1, 1), s2(1, 1);
  s1 << 4.0;
  s2 << 9.0;
  CHECK(gaussian_w2(Eigen::VectorXd::Zero(1), s1, Eigen::VectorXd::Zero(1),
                    s2) == doctest::Approx(1.0).epsilon(1e-12));

  // Diagonal specialization sqrt(sum (sqrt(a_i) - sqrt(b_i))^2).
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd a(3), b(3);
    for (int i = 0; i < 3; ++i) {
      a[i] = 0.1 + 3.0 * rng.uniform01();
      b[i] = 0.1 + 3.0 * rng.uniform01();
    }
    double want = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double diff = std::sqrt(a[i]) - std::sqrt(b[i]);
      want += diff * diff;
    }
    want = std::sqrt(want);
    const double got =
        gaussian_w2(Eigen::VectorXd::Zero(3), a.asDiagonal(),
                    Eigen::VectorXd::Zero(3), b.asDiagonal());
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("gaussian_w2 is symmetric, triangular, and rejects non-PSD input") {
  Xoshiro256pp rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 3 + static_cast<int>(rng.uniform01() * 3);
    GaussianLaw a, b, c;
    for (GaussianLaw* g : {&a, &b, &c}) {
      g->mean = Eigen::VectorXd::Zero(d);
      for (int i = 0; i < d; ++i) g->mean[i] = rng.normal_pair().first;
      g->cov = random_spd(d, rng);
    }
    const double ab = gaussian_w2(a, b);
    const double ba = gaussian_w2(b, a);
    const double bc = gaussian_w2(b, c);
    const double ac = gaussian_w2(a, c);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-10));
    CHECK(ac <= ab + bc + 1e-8);
  }

  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(gaussian_w2(Eigen::VectorXd::Zero(2), bad,
                              Eigen::VectorXd::Zero(2),
                              Eigen::MatrixXd::Identity(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("distance floor evaluator") {
  // Hand evaluation at m = 0.
  const double d8 = prop5_lower_bound(8, 1e-10, 0);
  const double want =
      1.0 / 640000.0 + std::pow(8.0, 1.5) * 1e-10 / (320.0 - 464.0 * 8e-10);
  CHECK(d8 == doctest::Approx(want).epsilon(1e-14));

  double prev = prop5_lower_bound(10, 1e-9, 0);
  for (std::uint64_t m : {1ull, 10ull, 1000ull, 100000ull}) {
    const double cur = prop5_lower_bound(10, 1e-9, m);
    CHECK(cur <= prev);
    prev = cur;
  }
  const double tail = 1000.0 * std::sqrt(10.0) * 1e-12 /
                      (320.0 - 464.0 * 1e-8);  // d^{3/2} h / (320 - 464 d h)
  CHECK(prop5_lower_bound(10, 1e-9, 400000000000ull) ==
        doctest::Approx(tail).epsilon(1e-9));

  CHECK_NOTHROW(prop5_lower_bound(10, 1e-9, 5));       // d*h at the boundary
  CHECK_THROWS_AS(prop5_lower_bound(10, 1.000001e-9, 5),
                  std::invalid_argument);
  CHECK_THROWS_AS(prop5_lower_bound(10, 0.0, 5), std::invalid_argument);
}

TEST_CASE("second-moment distance floor") {
  CHECK(second_moment_w2_lower_bound(20.0, 10) == 0.0);
  CHECK(second_moment_w2_lower_bound(10.0, 10) == 0.0);
  const double d = 100.0;
  const double ew2 = 320001.0 / 160000.0 * d;
  CHECK(second_moment_w2_lower_bound(ew2, 100) ==
        doctest::Approx(std::sqrt(ew2) - std::sqrt(200.0)).epsilon(1e-14));
  CHECK(second_moment_w2_lower_bound(2.0 * d + 1.0, 100) ==
        doctest::Approx(std::sqrt(201.0) - std::sqrt(200.0)).epsilon(1e-12));
}

TEST_CASE("moment recursion dominates its closed-form floor") {
  const int d = 10;
  const double h = 1e-9;
  const double floor_term =
      (4.0 * d - 5.7 * d * d * h) / (2.0 - 2.9 * d * h);
  MomentTriple m = shifted_init_moments(d, 1.0 / 400.0);
  double decay = 1.0;
  for (std::uint64_t it = 0; it <= 1000000; ++it) {
    const double moment_floor = decay * d / 320000.0 + floor_term;
    CHECK(m.ew2 >= moment_floor * (1.0 - 1e-12));
    // The W2 floor from the second moment dominates the closed-form bound.
    CHECK(second_moment_w2_lower_bound(m.ew2, d) >=
          prop5_lower_bound(d, h, it) * (1.0 - 1e-12));
    if (it == 1000000) break;
    m = rc_second_moment_step(m, d, h);
    decay *= 1.0 - 2.0 * h;
  }
}

TEST_CASE("step exponentials stay inside the quadratic-remainder envelope") {
  using testsupport::Big;
  // e^{-2s} = 1 - 2s + 2s^2 + D1 (s/d)^3 and e^{-4s} = 1 - 4s + 8s^2 +
  // D2 (s/d)^3 with D1, D2 negative, |D1| < 10 d^3, |D2| < 100 d^3.
  // Equivalently g1(s) = (e^{-2s} - 1 + 2s - 2s^2)/s^3 lies in (-10, 0).
  for (double s : {1e-9, 1e-8, 1e-6, 1e-4, 1e-2, 0.1, 1.0, 3.0}) {
    const Big bs(s);
    const Big s3 = bs * bs * bs;
    const Big g1 = (exp(-(bs + bs)) - Big(1.0) + Big(2.0) * bs -
                    Big(2.0) * bs * bs) /
                   s3;
    const Big four(4.0), eight(8.0);
    const Big g2 = (exp(-(four * bs)) - Big(1.0) + four * bs -
                    eight * bs * bs) /
                   s3;
    CHECK(g1.to_double() < 0.0);
    CHECK(g1.to_double() > -10.0);
    CHECK(g2.to_double() < 0.0);
    CHECK(g2.to_double() > -100.0);
  }
}

TEST_CASE("contraction bound for the coordinate sampler") {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(4);
  const Eigen::VectorXd phi = Eigen::VectorXd::Constant(4, 0.25);

  // Discretization term alone: 40 * sqrt(gamma) * h * sqrt(sum kappa^2/phi^2).
  CHECK(theorem3_rhs(0.0, 0, 1e-3, 1.0, 1.0, ones, phi) ==
        doctest::Approx(0.32).epsilon(1e-12));
  CHECK(theorem3_rhs(2.0, 0, 1e-3, 1.0, 1.0, ones, phi) ==
        doctest::Approx(8.32).epsilon(1e-12));

  // Exponential decay in m.
  const double w0 = 5.0;
  const double far = theorem3_rhs(w0, 100000000, 1e-3, 1.0, 1.0, ones, phi);
  CHECK(far == doctest::Approx(0.32).epsilon(1e-6));

  // Shrinking the schedule weight of the worst coordinate hurts.
  Eigen::VectorXd kappa(3);
  kappa << 2.0, 1.0, 1.0;
  const Eigen::VectorXd uniform3 = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
  Eigen::VectorXd squeezed(3);
  squeezed << 1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0;
  squeezed /= squeezed.sum();
  CHECK(theorem3_rhs(0.0, 0, 1e-3, 1.0, 1.0, kappa, squeezed) >
        theorem3_rhs(0.0, 0, 1e-3, 1.0, 1.0, kappa, uniform3));

  CHECK_THROWS_AS(theorem3_rhs(1.0, 0, 1e-3, 1.0, 1.0, kappa, phi),
                  std::invalid_argument);
}

TEST_CASE("contraction bound for the full-vector sampler") {
  // m = 0: sqrt(2) w0 + sqrt(2d) kappa h.
  CHECK(theorem_ulmc_rhs(3.0, 0, 1e-2, 1.0, 1.0, 5.0, 8) ==
        doctest::Approx(3.0 * std::sqrt(2.0) + 4.0 * 5.0 * 1e-2)
            .epsilon(1e-12));
  // Large m leaves the discretization term.
  CHECK(theorem_ulmc_rhs(3.0, 1000000, 1e-2, 1.0, 1.0, 5.0, 8) ==
        doctest::Approx(4.0 * 5.0 * 1e-2).epsilon(1e-9));
  // Decay rate 0.375 mu h sqrt(gamma) per iteration.
  const double r1 = theorem_ulmc_rhs(1.0, 1, 0.1, 4.0, 0.5, 1.0, 2) -
                    theorem_ulmc_rhs(0.0, 1, 0.1, 4.0, 0.5, 1.0, 2);
  CHECK(r1 == doctest::Approx(std::sqrt(2.0) *
                               std::exp(-0.375 * 0.5 * 0.1 * 2.0))
                  .epsilon(1e-12));
}
