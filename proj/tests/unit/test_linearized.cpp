#include <cmath>

#include "boltz/errors.hpp"
#include "boltz/linearized.hpp"
#include "doctest.h"

using namespace boltz;

namespace {

// Maxwell molecules are outside the hard-potential range make_kernel accepts,
// but the linearized assembly is valid for any gamma >= 0.
KernelSpec maxwell_molecules() {
  auto spec = hard_spheres(3, 1.0);
  spec.gamma = 0.0;
  return spec;
}

MaxwellianParams standard(int dim) { return {1.0, Vec::Zero(dim), 1.0}; }

GalerkinBasis small_basis() {
  GalerkinBasis b;
  b.degree = 8;
  b.l_max = 3;
  return b;
}

}  // namespace

TEST_CASE("Maxwell molecules: exact isotropic eigenvalues") {
  // constant b with A0 = 1: eigenvalue of L_2^{(1/2)} is -1/3, of |v|^2 Y_2 is -1/2
  const auto spec = maxwell_molecules();
  const auto gap = spectral_gap(standard(3), spec, small_basis());
  CHECK(gap.kernel_dim == 5);
  CHECK(gap.lambda_hat == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK(gap.sectors[2].lambda_hat == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("pointwise operator agrees with the Galerkin eigenpair") {
  const auto spec = maxwell_molecules();
  const auto p = standard(3);
  // L_2^{(1/2)}(x) = x^2/2 - 5x/2 + 15/8 with x = |v|^2/2
  const PerturbationFn phi = [](const Vec& v) {
    const double x = 0.5 * v.squaredNorm();
    return 0.5 * x * x - 2.5 * x + 15.0 / 8.0;
  };
  Eigen::MatrixXd pts(3, 3);
  pts << 0.0, 1.0, -0.7, 0.3, 0.5, 1.9, 0.2, -1.1, 0.4;
  const auto Lphi = lm_apply(phi, pts, p, spec);
  for (Eigen::Index i = 0; i < pts.cols(); ++i)
    CHECK(Lphi[static_cast<std::size_t>(i)] == doctest::Approx(-phi(pts.col(i)) / 3.0).epsilon(1e-6));
}

TEST_CASE("invariants are annihilated and the form is symmetric and non-positive") {
  const auto spec = hard_spheres(3, 1.0);
  const auto p = standard(3);
  LmQuadrature q;
  q.n_hermite = 8;
  q.sphere = {6, 12};
  const PerturbationFn one = [](const Vec&) { return 1.0; };
  const PerturbationFn vx = [](const Vec& v) { return v[0]; };
  const PerturbationFn en = [](const Vec& v) { return v.squaredNorm(); };
  Eigen::MatrixXd pts(3, 2);
  pts << 0.4, -1.2, 0.1, 0.8, -0.3, 0.5;
  for (const auto& f : {one, vx, en})
    for (double r : lm_apply(f, pts, p, spec, q)) CHECK(std::abs(r) < 1e-10);

  const PerturbationFn a = [](const Vec& v) { return v[0] * v[1]; };
  const PerturbationFn b = [](const Vec& v) { return v[0] * v[1] + 0.3 * v[0] * v[0] - 0.1 * v[2] * v[2]; };
  const double ab = lm_bilinear(a, b, p, spec, q);
  const double ba = lm_bilinear(b, a, p, spec, q);
  CHECK(ab == doctest::Approx(ba).epsilon(1e-2));
  CHECK(lm_bilinear(a, a, p, spec, q) < 0.0);
  CHECK(lm_bilinear(b, b, p, spec, q) < 0.0);
}

TEST_CASE("hard-sphere gap: kernel, sign, symmetry and basis stability") {
  const auto spec = hard_spheres(3, 1.0);
  GalerkinBasis b10;
  b10.degree = 10;
  GalerkinBasis b12;
  const auto g10 = spectral_gap(standard(3), spec, b10);
  const auto g12 = spectral_gap(standard(3), spec, b12);
  CHECK(g12.kernel_dim == 5);
  CHECK(g12.lambda_hat > 0.0);
  CHECK(g12.symmetry_error < 1e-10);
  for (double r : g12.kernel_residuals) CHECK(r < 1e-10);
  CHECK(std::abs(g10.lambda_hat / g12.lambda_hat - 1.0) < 0.02);
  // Galerkin estimates approach the gap from above
  CHECK(g12.lambda_hat <= g10.lambda_hat + 1e-12);
  const auto rows = gap_rows(g12, b12);
  CHECK(rows.back().sector == "all");
  CHECK(rows.size() == 6);
}

TEST_CASE("two dimensions and non-constant angular kernel") {
  const auto g2 = spectral_gap(standard(2), hard_spheres(2, 1.0), small_basis());
  CHECK(g2.kernel_dim == 4);
  CHECK(g2.lambda_hat > 0.0);
  const auto spec = normalize_b(make_kernel(3, 0.5, AngularFunction(AngularForm::Polynomial, {1.0, 0.0, 0.5})));
  const auto g = spectral_gap(standard(3), spec, small_basis());
  CHECK(g.kernel_dim == 5);
  CHECK(g.symmetry_error < 1e-10);
}

TEST_CASE("scaling law and translation invariance") {
  const auto spec = hard_spheres(3, 1.0);
  const auto basis = small_basis();
  const auto dens = gap_scaling_check(standard(3), {2.0, Vec::Zero(3), 1.0}, spec, basis);
  CHECK(dens.pass);
  CHECK(dens.ratio == doctest::Approx(2.0).epsilon(1e-8));
  const auto temp = gap_scaling_check(standard(3), {1.0, Vec::Zero(3), 4.0}, spec, basis);
  CHECK(temp.pass);
  CHECK(temp.ratio == doctest::Approx(2.0).epsilon(1e-8));
  Vec u(3);
  u << 0.7, -1.3, 2.0;
  const auto shift = gap_scaling_check(standard(3), {1.0, u, 1.0}, spec, basis);
  CHECK(shift.ratio == doctest::Approx(1.0).epsilon(1e-12));

  // pointwise operator commutes with the Galilean shift
  const PerturbationFn phi = [](const Vec& v) { return v[0] * v[0] * v[1]; };
  const PerturbationFn phi_u = [&](const Vec& v) { return phi(v - u); };
  Eigen::MatrixXd x(3, 1);
  x << 0.3, -0.4, 0.9;
  LmQuadrature q;
  q.n_hermite = 6;
  q.sphere = {4, 8};
  const auto l0 = lm_apply(phi, x, standard(3), spec, q);
  const Eigen::MatrixXd xu = x.colwise() + u;
  const auto l1 = lm_apply(phi_u, xu, {1.0, u, 1.0}, spec, q);
  CHECK(l1[0] == doctest::Approx(l0[0]).epsilon(1e-10));
}

TEST_CASE("failure modes") {
  auto spec = hard_spheres(3, 1.0);
  CHECK_THROWS_AS(static_cast<void>(spectral_gap(standard(2), spec, small_basis())), ConfigInvalid);
  // degree 1 cannot hold the energy invariant
  GalerkinBasis tiny;
  tiny.degree = 1;
  CHECK_THROWS_AS(static_cast<void>(spectral_gap(standard(3), spec, tiny)), KernelDimensionMismatch);
}
