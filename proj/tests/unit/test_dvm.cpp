#include <cmath>
#include <random>

#include "boltz/analysis.hpp"
#include "boltz/dvm.hpp"
#include "boltz/errors.hpp"
#include "boltz/measures.hpp"
#include "doctest.h"

using namespace boltz;

namespace {

GridCollision make_op(int n, double R, double gamma = 1.0, DvmResolution res = {}) {
  return GridCollision(GridGeometry::make(3, n, R), hard_spheres(3, gamma), res);
}

GridDensity bimodal(const std::shared_ptr<const GridGeometry>& geom) {
  Vec u1 = Vec::Zero(3), u2 = Vec::Zero(3);
  u1[0] = 1.2;
  u2[0] = -1.2;
  u2[1] = 0.4;
  const MaxwellianMixture mix{{{0.6, u1, 0.5}, {0.4, u2, 0.4}}};
  return mix.normalized().grid(geom);
}

GridDensity random_field(const std::shared_ptr<const GridGeometry>& geom, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return GridDensity::from_function(geom, [&](const Vec& v) { return u(rng) * std::exp(-0.5 * v.squaredNorm()); });
}

double rel(const GridDensity& a, const GridDensity& b) { return (a - b).l1_norm() / b.l1_norm(); }

}  // namespace

TEST_CASE("grid gain term: zero, balance, bilinearity") {
  const auto op = make_op(9, 5.0);
  const auto& geom = op.geometry_ptr();
  const GridDensity zero(geom);
  CHECK(op.qplus(zero, zero).l1_norm() == 0.0);

  const auto f = random_field(geom, 1), g = random_field(geom, 2), k = random_field(geom, 3);
  const auto fields = q_on_grid(f, f, op.kernel());
  CHECK(std::abs(fields.q_plus.mass() + fields.overflow_mass - fields.q_minus.mass()) < 1e-12 * fields.q_minus.mass());
  CHECK(fields.overflow_mass < 1e-6 * fields.q_minus.mass());

  CHECK(rel(op.qplus(f, g), op.qplus(g, f)) < 1e-14);
  const auto lhs = op.qplus(f, 2.0 * g + 0.5 * k);
  const auto rhs = 2.0 * op.qplus(f, g) + 0.5 * op.qplus(f, k);
  CHECK(rel(lhs, rhs) < 1e-13);
  CHECK(op.qplus(f, g).min_value() >= 0.0);
}

TEST_CASE("grid gain term: momentum exact, energy to deposition order") {
  const auto op = make_op(11, 6.0);
  const auto f = bimodal(op.geometry_ptr());
  const auto qp = op.qplus(f, f), qm = op.qminus(f, f);
  CHECK((qp.momentum() - qm.momentum()).norm() < 1e-12 * qm.mass());
  const double h = op.geometry().h;
  CHECK(std::abs(qp.energy() - qm.energy()) < 3.0 * h * h * qm.mass());
}

TEST_CASE("equilibrium residual shrinks under refinement") {
  double prev = INFINITY;
  for (int n : {9, 13, 17}) {
    const auto op = make_op(n, 6.0);
    const auto M = maxwellian_grid(MaxwellianParams::standard(3), op.geometry_ptr());
    const auto qp = op.qplus(M, M), qm = op.qminus(M, M);
    const double r = (qp - qm).l1_norm() / qm.l1_norm();
    CHECK(r < prev);
    prev = r;
  }
  CHECK(prev < 0.1);
}

TEST_CASE("overflow is detected") {
  const auto op = make_op(7, 3.0, 1.0, {{4, 8}, 1e-9});
  const auto f = GridDensity::from_function(op.geometry_ptr(), [](const Vec& v) {
    return std::abs(v[0]) > 2.5 && std::abs(v[1]) > 2.5 ? 1.0 : 0.0;
  });
  CHECK_THROWS_AS(static_cast<void>(op.qplus(f, f)), DomainOverflow);
  CHECK_THROWS_AS(evolve(f, op, {0.1, 0.1, true}), DomainOverflow);
}

TEST_CASE("evolve: conservation, relaxation, stationarity") {
  const auto op = make_op(11, 6.0);
  const auto& geom = op.geometry_ptr();
  const auto f0 = bimodal(geom);
  const auto tr = evolve(f0, op, {0.2, 2.0, true});
  const auto M = maxwellian_grid(MaxwellianParams::standard(3), geom);
  REQUIRE(tr.f.size() == 11);
  double prev = INFINITY;
  for (std::size_t k = 0; k < tr.f.size(); ++k) {
    const auto& f = tr.f[k];
    CHECK(std::abs(f.mass() - f0.mass()) < 1e-12 * f0.mass());
    CHECK((f.momentum() - f0.momentum()).norm() < 1e-12);
    CHECK(std::abs(f.energy() - f0.energy()) < 1e-12 * f0.energy());
    CHECK(f.min_value() >= 0.0);
    const double d = grid_distance(f, M);
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 0.1 * grid_distance(f0, M));

  const auto trm = evolve(M, op, {0.2, 1.0, true});
  CHECK(grid_distance(trm.f.back(), M) < 0.05);

  CHECK_THROWS_AS(evolve(GridDensity(geom), op, {0.1, 1.0, true}), ZeroMass);
}

TEST_CASE("evolve: first order in dt") {
  const auto op = make_op(9, 5.0);
  const auto f0 = bimodal(op.geometry_ptr());
  const auto a = evolve(f0, op, {0.2, 0.8, true}).f.back();
  const auto b = evolve(f0, op, {0.1, 0.8, true}).f.back();
  const auto c = evolve(f0, op, {0.05, 0.8, true}).f.back();
  const double ratio = (a - b).l1_norm() / (b - c).l1_norm();
  CHECK(ratio > 1.6);
  CHECK(ratio < 2.5);
}

TEST_CASE("collision frequency bound") {
  const auto op = make_op(9, 5.0);
  const auto tr = evolve(bimodal(op.geometry_ptr()), op, {0.25, 1.5, true});
  const auto fb = collision_frequency_bound(tr, 1.0, op.kernel());
  CHECK(fb.a_value == doctest::Approx(1.0 / 33536.0).epsilon(1e-12));
  CHECK(fb.pass);

  const auto op2 = make_op(9, 5.0, 2.0);
  const auto f = bimodal(op2.geometry_ptr());
  const auto L = op2.loss_rate(f);
  const auto& G = op2.geometry();
  const Vec mom = f.momentum();
  for (std::size_t i = 0; i < G.count; i += 37) {
    const Vec v = G.node(i);
    const double exact = v.squaredNorm() * f.mass() - 2.0 * v.dot(mom) + f.energy();
    CHECK(L[i] == doctest::Approx(exact).epsilon(1e-12));
  }
  const auto tr2 = evolve(f, op2, {0.25, 1.0, true});
  const auto fb2 = collision_frequency_bound(tr2, 1.0, op2.kernel());
  CHECK(fb2.a_value == 1.0);
}

TEST_CASE("positive decomposition") {
  const auto op = make_op(9, 5.0);
  const auto tr = evolve(bimodal(op.geometry_ptr()), op, {0.25, 2.0, true});
  const auto st = decompose(tr, 1.0, 2, op);
  REQUIRE(st.t.size() == 5);
  for (std::size_t m = 0; m < st.t.size(); ++m) {
    CHECK(rel(st.f_n[0][m], tr.f[st.k0 + m]) == 0.0);
    CHECK(st.h_n[0][m].l1_norm() == 0.0);
  }
  const auto rep = decomposition_report(st, tr, op.kernel());
  CHECK(rep.rows.size() == 10);
  CHECK(rep.max_identity_residual < 1e-12);
  CHECK(rep.min_node_value >= 0.0);
  CHECK(rep.damping_ordering);
  CHECK(rep.pass);
  for (const auto& r : rep.rows) CHECK(r.l1_h <= r.envelope_rhs);

  CHECK_THROWS_AS(decompose(tr, 1.1, 1, op), InsufficientTemporalResolution);
  CHECK_THROWS_AS(decompose(tr, 2.0, 1, op), InsufficientTemporalResolution);
}
