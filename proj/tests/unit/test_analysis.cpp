#include <cmath>
#include <random>

#include "boltz/analysis.hpp"
#include "boltz/errors.hpp"
#include "doctest.h"

using namespace boltz;

namespace {

constexpr double kA2 = 2.0 / 3.0;

bool rel_close(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol * std::abs(b); }

MaxwellianMixture random_mixture(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> w(0.1, 1.0), t(0.2, 2.0), u(-1.5, 1.5);
  std::uniform_int_distribution<int> k(2, 3);
  MaxwellianMixture m;
  const int count = k(rng);
  for (int c = 0; c < count; ++c) {
    Vec mean(dim);
    for (int d = 0; d < dim; ++d) mean[d] = u(rng);
    m.components.push_back({w(rng), mean, t(rng)});
  }
  return m.normalized();
}

}  // namespace

TEST_CASE("moment constants") {
  CHECK(k_s(0.0, 1.0, 4.0, kA2, 1.0) == 4.0);
  CHECK(k_s(2.0, 1.0, 4.0, kA2, 1.0) == 4.0);
  CHECK(rel_close(k_s(3.0, 1.0, 4.0, kA2, 1.0), 16768.0));
  CHECK(rel_close(k_s(4.0, 1.0, 4.0, kA2, 1.0), 281165824.0));
  double prev = 0.0;
  for (double s = 0.0; s <= 8.0; s += 0.25) {
    const double k = k_s(s, 1.0, 4.0, kA2, 0.7);
    CHECK(k >= prev);
    prev = k;
  }
  CHECK(rel_close(moment_envelope(4.0, 1.0, 1.0, 4.0, kA2, 1.0), 4.0 * 281165824.0));
}

TEST_CASE("collision frequency floor") {
  CHECK(rel_close(collision_frequency_floor(3, 1.0, kA2, 1.0), 1.0 / 33536.0));
  CHECK(collision_frequency_floor(3, 2.0, 2.0 / 3.0 * 1.3, 0.4) == 1.0);
}

TEST_CASE("exponential moment rate") {
  CHECK(exponential_moment_alpha(0.0, 1.0, 4.0, kA2, 1.0, 2.0) == 0.0);
  const double beta = 16.0 * 4.0 * kA2;
  CHECK(rel_close(exponential_moment_alpha(0.5, 1.0, 4.0, kA2, 1.0, 2.0), 0.25 * 0.25 * (1.0 - std::exp(-0.5 * beta))));
}

TEST_CASE("lower envelope") {
  const auto p1 = lower_envelope_params(1.0, 1.0, 1.0, 3);
  CHECK_FALSE(p1.quadratic);
  CHECK(rel_close(p1.alpha, 2.0));
  CHECK(rel_close(p1.beta, 524288.0));
  const auto p2 = lower_envelope_params(1.0, 1.0, 2.0, 3);
  CHECK(p2.quadratic);
  CHECK(rel_close(p2.kappa, 1024.0));
  for (double gamma : {0.3, 1.0, 1.7}) CHECK(lower_envelope_params(1.0, 1.0, gamma, 3).alpha >= 1.0);

  for (double gamma : {0.5, 1.0, 2.0})
    for (double d0 : {0.0, 0.3, 1.0, 2.0}) {
      CHECK(lower_envelope(0.0, 1.0, 1.0, gamma, d0, 3) <= d0 + 1e-15);
      double prev = INFINITY;
      for (double t = 0.0; t < 1e-3; t += 1e-4) {
        const double v = lower_envelope(t, 1.0, 1.0, gamma, d0, 3);
        CHECK(v <= prev);
        prev = v;
      }
    }
  CHECK(rel_close(lower_envelope(0.0, 1.0, 1.0, 1.0, 0.5, 3), std::pow(4.0, -1.0) * 0.25));
  CHECK_THROWS_AS(lower_envelope(0.0, 1.0, 1.0, 1.0, 2.5, 3), InvalidD0);
  CHECK_THROWS_AS(lower_envelope(0.0, 1.0, 1.0, 1.0, -0.1, 3), InvalidD0);
}

TEST_CASE("stability threshold and modulus") {
  CHECK(rel_close(stability_threshold(1.0, 1.0, 4.0, 3), 3.0 / 224.0));
  ParticleMeasure F(3, 0);
  Vec v = Vec::Zero(3);
  F.push(0.5, v);
  v[0] = 2.0;
  F.push(0.5, v);
  CHECK(stability_modulus(F, 0.0, 0.5, 2.0) == 0.0);
  double prev = 0.0;
  for (double r = 1e-6; r < 1.0; r *= 3.0) {
    const double m = stability_modulus(F, r, 0.5, 2.0);
    CHECK(m >= prev);
    prev = m;
  }
  CHECK(rel_close(restart_growth_rate(1.0, 1.0, 4.0, kA2, 1.0), 4.0 * (16768.0 + 4.0) * 2.0));
}

TEST_CASE("l1 to weighted bound") {
  CHECK(weighted_from_l1_bound(0.0, 3) == 0.0);
  // atomic F vs M: ||F-M||_0 = 2, ||F-M||_2 = 2(1+N)
  for (int dim : {1, 2, 3, 5}) {
    const double rhs = weighted_from_l1_bound(2.0, dim);
    const double lhs = 2.0 * (1.0 + dim);
    CHECK(rhs / lhs - 1.0 >= 0.38);
  }
  std::mt19937_64 rng(11);
  for (int dim : {2, 3}) {
    const auto geom = GridGeometry::make(dim, dim == 2 ? 121 : 41, 9.0);
    const auto M = maxwellian_grid(MaxwellianParams::standard(dim), geom);
    for (int rep = 0; rep < 10; ++rep) {
      const auto F = random_mixture(rng, dim).grid(geom);
      const double d0 = grid_distance(F, M, 0.0), d2 = grid_distance(F, M, 2.0);
      CHECK(d2 <= weighted_from_l1_bound(d0, dim));
    }
  }
}

TEST_CASE("mixture normalization") {
  std::mt19937_64 rng(5);
  const auto m = random_mixture(rng, 3);
  const auto p = m.triple();
  CHECK(p.rho == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(p.u.norm() < 1e-13);
  CHECK(p.T == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("exponential fit") {
  std::vector<double> t, d;
  for (int i = 0; i <= 40; ++i) {
    t.push_back(0.05 * i);
    d.push_back(3.0 * std::exp(-2.0 * t.back()));
  }
  const auto fit = exp_fit(t, d, {});
  CHECK(std::abs(fit.C_hat - 3.0) < 1e-10);
  CHECK(std::abs(fit.lambda_hat - 2.0) < 1e-10);
  CHECK(fit.r2 == doctest::Approx(1.0));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> noise(0.0, 1e-3);
  std::vector<double> tn, dn;
  for (int i = 0; i <= 200; ++i) {
    tn.push_back(0.05 * i);
    dn.push_back(2.0 * std::exp(-1.3 * tn.back()) + 1e-3 + noise(rng));
  }
  const auto windowed = exp_fit(tn, dn, {0.0, 3.0, 0.0});
  CHECK(std::abs(windowed.lambda_hat / 1.3 - 1.0) < 0.05);

  const auto flat = exp_fit(t, std::vector<double>(t.size(), 0.7), {});
  CHECK(std::abs(flat.lambda_hat) < 1e-12);

  CHECK_THROWS_AS(exp_fit(t, d, {10.0, 20.0, 0.0}), EmptyWindow);
  CHECK_THROWS_AS(exp_fit(t, d, {0.0, 1e300, 10.0}), EmptyWindow);
}

TEST_CASE("envelope verdicts") {
  auto report = make_envelope_report(3, 1.0, kA2, 1.0, 4.0, 1.0);
  report.d0 = 0.0;
  Trajectory eq;
  eq.moments.assign(7, {});
  for (int i = 0; i <= 10; ++i) {
    eq.t.push_back(0.5 * i);
    eq.distance.push_back(0.0);
    for (int k = 0; k < 7; ++k) eq.moments[k].push_back(k == 0 ? 1.0 : (k == 2 ? 4.0 : 10.0 * (k + 1)));
  }
  eq.exp_moment.assign(eq.t.size(), 1.5);
  auto v = envelope_verdict(eq, report);
  CHECK(all_pass(v));
  CHECK(v.size() == 4);

  auto broken = eq;
  broken.moments[4][5] = 1e30;
  v = envelope_verdict(broken, report);
  CHECK_FALSE(all_pass(v));
  for (const auto& x : v) CHECK(x.pass == (x.check != "moment_4"));

  report.d0 = 0.5;
  auto low = eq;
  for (auto& d : low.distance) d = 0.4;
  low.distance[0] = 0.0;
  v = envelope_verdict(low, report);
  for (const auto& x : v) CHECK(x.pass == (x.check != "lower_envelope"));

  report.d0 = 0.0;
  report.fit = ExpFit{1.0, 0.2, 0.99, 10};
  report.gap = 1.0;
  v = envelope_verdict(eq, report);
  for (const auto& x : v) CHECK(x.pass == (x.check != "rate_band"));

  const auto j = to_json(report);
  CHECK(j["lower_bound"]["beta"].get<double>() == doctest::Approx(524288.0));
  CHECK(j["a"].get<double>() == doctest::Approx(1.0 / 33536.0));
}
