#include <cmath>

#include "boltz/errors.hpp"
#include "boltz/stability.hpp"
#include "doctest.h"

using namespace boltz;

namespace {

struct Fixture {
  std::shared_ptr<const GridGeometry> geom = GridGeometry::make(3, 9, 5.0);
  GridCollision op{geom, hard_spheres(3, 1.0), {}};
  EvolveOptions opts;
  GridDensity F0;
  DvmTrajectory F;

  Fixture() {
    opts.dt = 0.2;
    opts.t_end = 2.0;
    Vec u1 = Vec::Zero(3), u2 = Vec::Zero(3);
    u1[0] = 1.2;
    u2[0] = -1.2;
    u2[1] = 0.4;
    F0 = MaxwellianMixture{{{0.6, u1, 0.5}, {0.4, u2, 0.4}}}.normalized().grid(geom);
    F = evolve(F0, op, opts);
  }

  GridDensity towards(const MaxwellianParams& p, double eps) const {
    return (1.0 - eps) * F0 + eps * maxwellian_grid(p, geom);
  }
};

}  // namespace

TEST_CASE("twin runs: calibrate, lock, verify") {
  const Fixture fx;
  Vec a = Vec::Zero(3), b = Vec::Zero(3);
  a[2] = 0.5;
  b[0] = -0.8;
  std::vector<TwinRun> runs;
  for (double eps : {0.01, 0.05, 0.2}) runs.push_back(twin_run(fx.F, fx.towards({1.0, a, 0.8}, eps), fx.op, fx.opts));
  for (const auto& r : runs) {
    CHECK(r.distance.front() == doctest::Approx(r.r).epsilon(1e-12));
    CHECK(r.psi >= r.r);
    // L1 contraction of the discrete flow within deposition error
    CHECK(r.distance.back() < r.distance.front());
  }
  const auto cal = calibrate_stability(runs);
  CHECK(cal.runs == 3);
  CHECK(cal.eta > 0.0);
  CHECK(cal.eta < 1.0);
  for (const auto& r : runs) CHECK(twin_run_stability(r, cal).pass);

  const auto locked = calibration_from_json(nlohmann::json::parse(to_json(cal).dump()));
  CHECK(locked.C == cal.C);
  CHECK(locked.eta == cal.eta);

  for (double eps : {0.03, 0.15}) {
    TwinRun run;
    const auto v = twin_run_stability(fx.F, fx.towards({1.0, b, 0.3}, eps), fx.op, fx.opts, locked, &run);
    CHECK(v.pass);
    CHECK(v.sup_distance == run.sup_distance);
  }
  const auto same = twin_run_stability(fx.F, fx.F0, fx.op, fx.opts, locked);
  CHECK(same.sup_distance == 0.0);
  CHECK(same.pass);

  // a deliberately tight constant must fail
  auto broken = locked;
  broken.C *= 1e-3;
  CHECK_FALSE(twin_run_stability(runs[1], broken).pass_modulus);
}

TEST_CASE("stability input checks") {
  const auto geom = GridGeometry::make(3, 7, 5.0);
  const GridDensity g = maxwellian_grid(MaxwellianParams::standard(3), geom);
  DvmTrajectory empty;
  GridCollision op(geom, hard_spheres(3, 1.0), {});
  CHECK_THROWS_AS(static_cast<void>(twin_run(empty, g, op, {})), ConfigInvalid);
  CHECK_THROWS_AS(static_cast<void>(calibrate_stability({})), ConfigInvalid);
  CHECK_THROWS_AS(static_cast<void>(calibration_from_json({{"C", 1.0}})), ConfigInvalid);
  CHECK_THROWS_AS(static_cast<void>(calibration_from_json({{"C", 1.0}, {"eta", 1.5}, {"C_short", 0.0}, {"short_horizon", 1.0}})),
                  ConfigInvalid);
}
