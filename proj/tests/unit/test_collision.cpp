#include <cmath>
#include <random>

#include "boltz/collision.hpp"
#include "doctest.h"

using namespace boltz;

namespace {

Vec vec3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

ParticleMeasure random_measure(std::mt19937_64& rng, int dim, int count, double spread = 1.5) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.1, 1.0);
  ParticleMeasure F(dim, count);
  for (int i = 0; i < count; ++i) {
    for (int d = 0; d < dim; ++d) F.v(d, i) = spread * nd(rng);
    F.w[i] = ud(rng);
  }
  return F;
}

WeakFormRequest request(int dim = 3, double gamma = 1.0) {
  return {normalize_b(make_kernel(dim, gamma, AngularFunction::constant(1.0))), {6, 10}};
}

}  // namespace

TEST_CASE("kernel average") {
  const auto req = request();
  const SphereQuadrature sphere(3, req.resolution);
  const auto one = test_function("one");
  CHECK(lb_psi(one, vec3(1, 0, 0), vec3(-1, 0, 0), req.kernel, sphere) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(lb_psi(one, vec3(1, 2, 0), vec3(1, 2, 0), req.kernel, sphere) == 0.0);
  const KernelSpec k4 = make_kernel(3, 0.5, AngularFunction(AngularForm::Polynomial, {1.0, 0.0, 1.0}));
  const Vec v = vec3(0.3, 1, -2), w = vec3(1, -1, 0.5);
  CHECK(lb_psi(one, v, w, k4, sphere) == doctest::Approx(std::pow((v - w).norm(), 0.5) * k4.a0).epsilon(1e-12));
}

TEST_CASE("weak operators on simple atoms") {
  const auto req = request();
  ParticleMeasure F, G, Z;
  F.push(1.0, vec3(1, 0, 0));
  G.push(1.0, vec3(-1, 0, 0));
  Z.push(1.0, vec3(0, 0, 0));
  const auto one = test_function("one");
  CHECK(weak_qplus(F, G, one, req) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(weak_qminus(F, G, one, req.kernel) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(weak_qplus(Z, Z, one, req) == 0.0);
  CHECK(weak_qminus(Z, Z, one, req.kernel) == 0.0);
}

TEST_CASE("collision invariants cancel") {
  std::mt19937_64 rng(21);
  for (double gamma : {0.5, 1.0, 2.0}) {
    const auto req = request(3, gamma);
    for (int trial = 0; trial < 10; ++trial) {
      const auto F = random_measure(rng, 3, 15);
      for (const std::string tag : {"one", "coord:0", "coord:1", "coord:2", "energy"}) {
        const auto psi = test_function(tag);
        const double qp = weak_qplus(F, F, psi, req);
        const double qm = weak_qminus(F, F, psi, req.kernel);
        const double scale = weak_qminus(F, F, test_function("bracket:2"), req.kernel);
        CHECK(std::abs(qp - qm) < 1e-12 * scale);
      }
    }
  }
}

TEST_CASE("symmetry, positivity and scaling of the gain term") {
  std::mt19937_64 rng(3);
  const auto req = request();
  const auto psi = test_function("bracket:3");
  for (int trial = 0; trial < 10; ++trial) {
    const auto F = random_measure(rng, 3, 10);
    const auto G = random_measure(rng, 3, 12);
    const double fg = weak_qplus(F, G, psi, req);
    CHECK(fg == doctest::Approx(weak_qplus(G, F, psi, req)).epsilon(1e-12));
    CHECK(fg > 0.0);
    const MaxwellianParams p{1.0, vec3(0.3, -1, 2), 2.5};
    const auto Fs = apply_inverse_normalization(F, p), Gs = apply_inverse_normalization(G, p);
    const auto one = test_function("one");
    CHECK(weak_qplus(Fs, Gs, one, req) ==
          doctest::Approx(std::sqrt(2.5) * weak_qplus(F, G, one, req)).epsilon(1e-12));
  }
}

TEST_CASE("bilinear bounds") {
  std::mt19937_64 rng(17);
  const auto req = request();
  ParticleMeasure Z;
  Z.push(1.0, vec3(0, 0, 0));
  const auto zero = qbound_check(Z, Z, 2.0, req);
  CHECK(zero.lhs_plus == 0.0);
  CHECK(zero.pass);
  for (int trial = 0; trial < 100; ++trial) {
    const auto F = random_measure(rng, 3, 8);
    const auto G = random_measure(rng, 3, 8);
    for (double s : {0.0, 2.0}) CHECK(qbound_check(F, G, s, req).pass);
    auto H = F;
    for (int i = 0; i < 8; ++i) H.w[i] *= 0.5 + (i % 2);
    CHECK(qdifference_bound_check(F, H, 2.0, req).pass);
  }
}

TEST_CASE("equilibrium residual on the grid") {
  // <v'>^4 is quadratic in sigma, so a 2 x 3 sphere rule is exact
  WeakFormRequest req = request();
  req.resolution = {2, 3};
  const auto p = MaxwellianParams::standard(3);
  const auto M = maxwellian_grid(p, GridGeometry::make(3, 11, 5.0));
  for (const std::string tag : {"one", "coord:0", "energy"})
    CHECK(q_equilibrium_residual(M, test_function(tag), req) < 1e-12);

  const auto psi4 = test_function("bracket:4");
  double prev = 1e9;
  for (int n : {9, 11, 13}) {
    const double r = q_equilibrium_residual(maxwellian_grid(p, GridGeometry::make(3, n, 6.0)), psi4, req);
    CHECK(r < prev);
    prev = r;
  }
  CHECK(prev < 1e-3);

  const auto geo = GridGeometry::make(3, 13, 6.0);
  const MaxwellianParams a{0.6, vec3(1.5, 0, 0), 0.6}, b{0.4, vec3(-1.0, 0.5, 0), 0.3};
  const auto bimodal = maxwellian_grid(a, geo) + maxwellian_grid(b, geo);
  CHECK(q_equilibrium_residual(bimodal, psi4, req) > 1.0);
}
