#include <cmath>
#include <numbers>

#include "boltz/dsmc.hpp"
#include "boltz/errors.hpp"
#include "doctest.h"

using namespace boltz;

namespace {

double energy(const ParticleMeasure& F) {
  double e = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) e += F.weight(i) * F.atom(i).squaredNorm();
  return e;
}

ParticleMeasure two_atoms() {
  ParticleMeasure F(3, 2);
  // away from bin edges
  F.v << 1.2, -1.2, 0.1, 0.1, -0.1, -0.1;
  F.w.setConstant(0.5);
  return F;
}

}  // namespace

TEST_CASE("collisions conserve momentum and energy") {
  for (int dim : {2, 3}) {
    auto spec = hard_spheres(dim, 1.0);
    auto e = Ensemble::from_measure(heavy_tail_sample(dim, 7.0, 2000, 3), spec, 9);
    const Vec p0 = e.particles.v * e.particles.w;
    const double e0 = energy(e.particles);
    DsmcConfig cfg;
    std::size_t accepted = 0;
    for (int s = 0; s < 40; ++s) accepted += advance(e, cfg).accepted;
    CHECK(accepted > 1000);
    CHECK(((e.particles.v * e.particles.w) - p0).norm() < 1e-12 * std::sqrt(e0));
    CHECK(std::abs(energy(e.particles) - e0) < 1e-12 * e0);
  }
  // non-constant angular kernel goes through the angular rejection
  auto spec = normalize_b(make_kernel(3, 0.5, AngularFunction(AngularForm::Polynomial, {1.0, 0.0, 2.0})));
  auto e = Ensemble::from_measure(maxwellian_sample(MaxwellianParams::standard(3), 1000, 4), spec, 2);
  const double e0 = energy(e.particles);
  DsmcConfig cfg;
  for (int s = 0; s < 20; ++s) static_cast<void>(advance(e, cfg));
  CHECK(std::abs(energy(e.particles) - e0) < 1e-12 * e0);
}

TEST_CASE("collision rate matches the loss term at equilibrium") {
  // hard spheres, A0 = 1: each particle collides at rate E|v - v*| = sqrt(2) sqrt(8/pi)
  const std::size_t m = 100000;
  auto e = Ensemble::from_measure(maxwellian_sample(MaxwellianParams::standard(3), m, 5), hard_spheres(3, 1.0), 1);
  DsmcConfig cfg;
  std::size_t accepted = 0;
  for (int s = 0; s < 20; ++s) accepted += advance(e, cfg).accepted;
  const double per_particle = 2.0 * static_cast<double>(accepted) / static_cast<double>(m);
  CHECK(per_particle == doctest::Approx(std::sqrt(2.0) * std::sqrt(8.0 / std::numbers::pi)).epsilon(0.01));
}

TEST_CASE("majorant refresh and retry") {
  auto e = Ensemble::from_measure(maxwellian_sample(MaxwellianParams::standard(3), 500, 6), hard_spheres(3, 1.0), 3);
  DsmcConfig cfg;
  cfg.majorant = 1e-3;
  cfg.dt = 40.0;  // enough candidates to hit a violating pair
  Ensemble copy = e;
  CHECK_THROWS_AS(static_cast<void>(step(copy, cfg)), MajorantViolated);
  const auto st = advance(e, cfg);
  CHECK(cfg.majorant >= automatic_majorant(e) / (1.0 + 1e-9));
  CHECK(st.accepted > 0);
}

TEST_CASE("runs are reproducible from the seed") {
  const auto F = maxwellian_sample(MaxwellianParams::standard(3), 2000, 8);
  auto a = Ensemble::from_measure(F, hard_spheres(3, 1.0), 11);
  auto b = Ensemble::from_measure(F, hard_spheres(3, 1.0), 11);
  DsmcConfig cfg;
  for (int s = 0; s < 10; ++s) {
    static_cast<void>(advance(a, cfg));
    static_cast<void>(advance(b, cfg));
  }
  CHECK((a.particles.v - b.particles.v).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ensemble construction checks") {
  ParticleMeasure F(3, 2);
  F.v.setRandom();
  F.w << 0.3, 0.7;
  CHECK_THROWS_AS(static_cast<void>(Ensemble::from_measure(F, hard_spheres(3, 1.0), 1)), ConfigInvalid);
}

TEST_CASE("Mehler transform of a Maxwellian is the Maxwellian") {
  Vec u(3);
  u << 0.5, -0.2, 0.1;
  const MaxwellianParams p{1.0, u, 1.5};
  const std::size_t count = 200000;
  const auto M = maxwellian_sample(p, count, 21);
  for (double n : {0.5, 1.0, 2.0, 4.0}) {
    const auto I = mehler_sample(M, n, count, 31);
    const auto q = conserved_triple(I);
    const double se = 1.0 / std::sqrt(static_cast<double>(count));
    CHECK(q.rho == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((q.u - u).norm() < 5.0 * std::sqrt(2.0 * p.T) * se);
    CHECK(std::abs(q.T - p.T) < 5.0 * p.T * std::sqrt(2.0 * 2.0 / 3.0) * se);
    // E|v - u|^4 = N(N+2) T^2, variance N(N+2)(N+4)(N+6) T^4 - (N(N+2) T^2)^2
    double m4 = 0.0;
    for (std::size_t i = 0; i < I.size(); ++i) m4 += I.weight(i) * std::pow((I.atom(i) - u).squaredNorm(), 2);
    const double exact = 15.0 * p.T * p.T;
    const double sd = std::sqrt(3.0 * 5.0 * 7.0 * 9.0 - 225.0) * p.T * p.T;
    CHECK(std::abs(m4 - exact) < 5.0 * std::sqrt(2.0) * sd * se);
  }
}

TEST_CASE("Mehler transform of two atoms converges back to the atoms") {
  const auto F = two_atoms();
  double prev = INFINITY;
  BinSpec bins{0.5, 3.0};
  for (double n : {0.5, 1.0, 2.0, 4.0}) {
    const auto I = mehler_sample(F, n, 100000, 41);
    const double d = measure_distance(I, F, 0.0, DistanceScheme::Binned, bins);
    CHECK(d < prev);
    prev = d;
    const auto q = conserved_triple(I);
    CHECK((q.u - Vec::Unit(3, 1) * 0.1 + Vec::Unit(3, 2) * 0.1).norm() < 0.02);
    CHECK(q.T == doctest::Approx(1.44 / 3.0).epsilon(0.02));
  }
  CHECK(prev < 0.01);
  ParticleMeasure dirac(3, 1);
  dirac.v.setZero();
  dirac.w << 1.0;
  CHECK_THROWS_AS(static_cast<void>(mehler_sample(dirac, 1.0, 10, 1)), DiracTemperature);
}

TEST_CASE("equilibrium start stays at the noise floor") {
  DsmcConfig cfg;
  cfg.t_end = 10.0;
  cfg.dt = 0.1;
  const auto tr = relax_experiment(maxwellian_sample(MaxwellianParams::standard(3), 20000, 51), hard_spheres(3, 1.0), cfg);
  for (const auto& r : tr.rows) CHECK(r.dist_binned < 2.0 * tr.noise_floor);
  CHECK(tr.max_triple_drift < 1e-9);
}

TEST_CASE("two-temperature mixture relaxes at the linearized rate") {
  Vec u1 = Vec::Zero(3), u2 = Vec::Zero(3);
  u1[0] = 1.0;
  u2[0] = -1.0;
  const MaxwellianMixture mix{{{0.5, u1, 0.3}, {0.5, u2, 1.2}}};
  DsmcConfig cfg;
  cfg.t_end = 6.0;
  cfg.seed = 3;
  const auto tr = relax_experiment(mix.sample(50000, 7), hard_spheres(3, 1.0), cfg);
  CHECK(tr.max_triple_drift < 1e-9);
  REQUIRE(tr.fit.has_value());
  // linearized hard-sphere gap at (1, 0, 1) is 1.0753
  CHECK(tr.fit->lambda_hat > 0.5 * 1.0753);
  CHECK(tr.fit->lambda_hat < 1.5 * 1.0753);
  CHECK(tr.rows.back().dist_binned < 0.1 * tr.rows.front().dist_binned);
  const auto traj = as_trajectory(tr);
  CHECK(traj.t.size() == tr.rows.size());
  CHECK(traj.moments[4].size() == tr.rows.size());
}

TEST_CASE("heavy-tailed start: moments produced under the envelope") {
  DsmcConfig cfg;
  cfg.t_end = 2.0;
  const auto F0 = heavy_tail_sample(3, 5.0, 50000, 61);
  const auto tr = relax_experiment(F0, hard_spheres(3, 1.0), cfg);
  const auto spec = hard_spheres(3, 1.0);
  const double mass = 1.0, energy_norm = 1.0 + 3.0;
  // sixth moment starts far above its equilibrium value and falls
  const double m6_0 = tr.rows.front().norms[6];
  CHECK(tr.rows.back().norms[6] < 0.5 * m6_0);
  for (std::size_t i = 1; i < tr.rows.size(); ++i) {
    const auto& r = tr.rows[i];
    for (int s : {4, 6}) {
      CHECK(std::isfinite(r.norms[s]));
      CHECK(r.norms[s] <= moment_envelope(s, r.t, mass, energy_norm, spec.a2, spec.gamma));
    }
    CHECK(std::isfinite(r.exp_moment));
  }
}
