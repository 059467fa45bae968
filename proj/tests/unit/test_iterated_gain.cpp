#include <cmath>
#include <numbers>
#include <random>

#include "boltz/errors.hpp"
#include "boltz/iterated_gain.hpp"
#include "doctest.h"

using namespace boltz;
using std::numbers::pi;

namespace {

Vec vec3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

Vec random_vec(std::mt19937_64& rng, int dim, double scale) {
  std::normal_distribution<double> nd;
  Vec v(dim);
  for (int d = 0; d < dim; ++d) v[d] = scale * nd(rng);
  return v;
}

}  // namespace

TEST_CASE("kb degenerate branches and closed form") {
  const KernelSpec hs = hard_spheres(3, 1.0);
  const KbQuadrature q(3, {4, 16});
  const Vec v = vec3(1, 0, 0), vs = vec3(0, 0, 0), w = vec3(2, 0, 0), ws = vec3(0, 2, 0);
  CHECK(kb(vs, vs, w, ws, hs, q) == 0.0);
  CHECK(kb(v, vs, w, w, hs, q) == 0.0);
  // hard spheres, N = 3, gamma = 1: K_B = 8 * 2 pi * b^2 / |v - v_*| = 1 / (pi |v - v_*|)
  CHECK(kb(v, vs, w, ws, hs, q) == doctest::Approx(1.0 / pi).epsilon(1e-13));
  // |t| >= 1: v far along n from the midpoint of w, w_*
  CHECK(kb(vec3(9, 0, 0), vs, w, ws, hs, q) == 0.0);
}

TEST_CASE("kb is nonnegative and translation invariant") {
  std::mt19937_64 rng(8);
  const KernelSpec spec = normalize_b(make_kernel(4, 0.7, AngularFunction(AngularForm::Polynomial, {1.0, 0.0, 2.0})));
  const KbQuadrature q(4, {6, 16});
  int positive = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const Vec v = random_vec(rng, 4, 1.0), vs = random_vec(rng, 4, 1.0), w = random_vec(rng, 4, 1.5),
              ws = random_vec(rng, 4, 1.5), z = random_vec(rng, 4, 3.0);
    const double k = kb(v, vs, w, ws, spec, q);
    CHECK(k >= 0.0);
    if (k > 0.0) ++positive;
    CHECK(kb(v - z, vs - z, w - z, ws - z, spec, q) == doctest::Approx(k).epsilon(1e-10));
  }
  CHECK(positive > 50);
}

TEST_CASE("pythagoras identities at positive configurations") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ud;
  double worst_dot = 0.0, worst_len = 0.0;
  bool ordered = true;
  for (int dim : {3, 5}) {
    for (int trial = 0; trial < 20000; ++trial) {
      const Vec vs = random_vec(rng, dim, 2.0), w = random_vec(rng, dim, 2.0), ws = random_vec(rng, dim, 2.0);
      Vec n = random_vec(rng, dim, 1.0);
      n.normalize();
      const double d = (w - ws).norm();
      const double proj = n.dot(0.5 * (w + ws) - vs);
      const double lo = std::max(0.0, proj - 0.5 * d), hi = proj + 0.5 * d;
      if (hi <= lo) continue;
      const Vec v = vs + (lo + ud(rng) * (hi - lo)) * n;
      Vec omega = random_vec(rng, dim, 1.0);
      omega -= omega.dot(n) * n;
      omega.normalize();
      const auto geo = gain_geometry(v, vs, w, ws, omega);
      REQUIRE(geo.has_value());
      if (!(std::abs(geo->t) < 1.0)) continue;
      const double scale = (v - vs).norm() * (v - geo->w_prime).norm() + 1e-300;
      worst_dot = std::max(worst_dot, std::abs((v - geo->w_prime).dot(v - vs)) / scale);
      const double lhs = (geo->w_prime - vs).squaredNorm();
      const double rhs = (v - vs).squaredNorm() + (v - geo->w_prime).squaredNorm();
      worst_len = std::max(worst_len, std::abs(lhs - rhs) / rhs);
      ordered = ordered && (geo->w_prime - vs).norm() >= (v - vs).norm() * (1.0 - 1e-12);
    }
  }
  CHECK(worst_dot < 1e-10);
  CHECK(worst_len < 1e-10);
  CHECK(ordered);
}

TEST_CASE("representation of the iterated gain operator") {
  RepresentationOptions opt;
  opt.mc_samples = 200000;
  opt.outer = {10, 20};
  opt.inner = {8, 16};
  const KernelSpec hs = hard_spheres(3, 1.0);
  const auto F = maxwellian_sample(MaxwellianParams::standard(3), 5, 1);
  const auto G = maxwellian_sample(MaxwellianParams::standard(3), 5, 2);
  const auto H = maxwellian_sample(MaxwellianParams::standard(3), 5, 3);
  const auto r = representation_check(F, G, H, test_function("one"), hs, opt);
  CHECK(r.z_score < 3.0);
  CHECK(r.lhs <= r.l1_bound);

  ParticleMeasure D;
  D.push(1.0, vec3(0.5, 0.5, 0.5));
  const auto z = representation_check(D, D, D, test_function("one"), hs, opt);
  CHECK(z.lhs == 0.0);
  CHECK(z.rhs == 0.0);
  CHECK(z.z_score == 0.0);

  ParticleMeasure bad = F;
  bad.w[0] = -1.0;
  CHECK_THROWS_AS(representation_check(bad, G, H, test_function("one"), hs, opt), MomentHypothesisViolated);
}

TEST_CASE("lp scaling exponent") {
  LpResolution res;
  res.n_dir_t = 6;
  res.n_dir_phi = 12;
  res.n_radial = 16;
  res.kb = {4, 24};
  const Vec vs = vec3(0.2, -0.1, 0.3), dir = vec3(1, 1, 0);
  const KernelSpec low = hard_spheres(3, 0.5);
  const auto a = lp_scaling_probe(vs, dir, 4.0 / 3.0, low, {0.5, 1.0, 2.0, 4.0}, res);
  CHECK(a.predicted == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(std::abs(a.slope - 0.25) < 0.05);
  const KernelSpec high = hard_spheres(3, 2.0);
  const auto b = lp_scaling_probe(vs, dir, 2.0, high, {0.5, 1.0, 2.0, 4.0}, res, vec3(0.1, 0.0, 0.2));
  CHECK(b.predicted == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(std::abs(b.slope - 2.5) < 0.05);

  CHECK_THROWS_AS(lp_scaling_probe(vs, dir, 2.0, low, {1.0, 2.0}, res), InadmissibleExponent);
  CHECK_THROWS_AS(lp_scaling_probe(vs, dir, 1.2, low, {1.0, 2.0}, res), InadmissibleExponent);
  CHECK_THROWS_AS(lp_scaling_probe(vs, dir, 3.0, high, {1.0, 2.0}, res), InadmissibleExponent);
  CHECK_THROWS_AS(lp_scaling_probe(vs, dir, 4.0 / 3.0, low, {0.0, 1.0}, res), CoincidentPair);
}

TEST_CASE("T_{w,w_*} operator") {
  const KernelSpec spec = hard_spheres(3, 0.5);
  const auto fgeo = GridGeometry::make(3, 9, 3.0);
  const auto vgeo = GridGeometry::make(3, 7, 4.0);
  TwwResolution res;
  res.n_band = 6;
  res.n_phi = 10;
  res.n_radial = 16;
  const GridDensity zero(fgeo);
  const auto tz = t_ww_apply(zero, vec3(1, 0, 0), vec3(-1, 0, 0), vgeo, spec, res);
  CHECK(tz.max_value() == 0.0);
  CHECK(tz.min_value() == 0.0);
  CHECK_THROWS_AS(t_ww_apply(zero, vec3(1, 0, 0), vec3(1, 0, 0), vgeo, spec, res), CoincidentPair);

  const auto M = maxwellian_grid(MaxwellianParams::standard(3), fgeo);
  const auto tm = t_ww_apply(M, vec3(1, 0, 0), vec3(-1, 0.5, 0), vgeo, spec, res);
  CHECK(tm.min_value() >= 0.0);
  CHECK(tm.max_value() > 0.0);
  CHECK(std::isfinite(tm.l1_norm()));
}

TEST_CASE("iteration constants") {
  const auto a = iteration_constants(3, 2.0);
  CHECK(a.n_gamma == 1);
  CHECK(a.p_n.empty());
  CHECK_FALSE(a.alpha_1.has_value());
  const auto b = iteration_constants(5, 1.0);
  CHECK(b.n_gamma == 4);
  REQUIRE(b.p_n.size() == 4);
  CHECK(b.p_n[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(b.p_n[1] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(b.p_n[2] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(std::isinf(b.p_n[3]));
  for (int n = 1; n <= 3; ++n) CHECK(b.theta_n[n - 1] == 0.0);
  CHECK(b.theta_n[3] == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(*b.alpha_1 == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(*b.alpha_2 == 0.0);
  const auto c = iteration_constants(6, 1.5);
  CHECK(c.n_gamma == 3);
  for (std::size_t i = 1; i < c.p_n.size(); ++i) CHECK(c.p_n[i] > c.p_n[i - 1]);
  CHECK(*c.alpha_1 > 0.0);
  CHECK(*c.alpha_1 < 1.0);
  CHECK(c.gamma_1 == 1.5);
  CHECK(c.gamma_star == doctest::Approx(0.5));
  const auto d = iteration_constants(3, 0.5);
  CHECK(d.n_gamma == 4);
  CHECK(*d.alpha_2 == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
}
