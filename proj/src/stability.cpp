#include "boltz/stability.hpp"

#include <algorithm>
#include <cmath>

#include "boltz/errors.hpp"
#include "boltz/measures.hpp"

namespace boltz {

TwinRun twin_run(const DvmTrajectory& F, const GridDensity& G0, const GridCollision& op, const EvolveOptions& opts) {
  if (F.f.empty()) throw ConfigInvalid("empty reference trajectory");
  if (!G0.geometry().same_as(F.f.front().geometry())) throw ConfigInvalid("twin runs need the same grid");
  const auto G = evolve(G0, op, opts);
  if (G.t.size() != F.t.size()) throw ConfigInvalid("twin runs need the same time grid");
  TwinRun run;
  run.r = grid_distance(F.f.front(), G0, 2.0);
  run.psi = psi_f0(F.f.front(), run.r);
  for (std::size_t k = 0; k < F.t.size(); ++k) {
    run.t.push_back(F.t[k]);
    run.distance.push_back(grid_distance(F.f[k], G.f[k], 2.0));
    run.sup_distance = std::max(run.sup_distance, run.distance.back());
  }
  return run;
}

nlohmann::json to_json(const StabilityCalibration& c) {
  return {{"C", c.C}, {"eta", c.eta}, {"C_short", c.C_short}, {"short_horizon", c.short_horizon},
          {"safety", c.safety}, {"runs", c.runs}};
}

StabilityCalibration calibration_from_json(const nlohmann::json& j) {
  StabilityCalibration c;
  try {
    c.C = j.at("C").get<double>();
    c.eta = j.at("eta").get<double>();
    c.C_short = j.at("C_short").get<double>();
    c.short_horizon = j.at("short_horizon").get<double>();
    c.safety = j.value("safety", 1.25);
    c.runs = j.value("runs", std::size_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(std::string("stability calibration: ") + e.what());
  }
  if (!(c.C > 0.0) || !(c.eta > 0.0 && c.eta < 1.0)) throw ConfigInvalid("stability calibration out of range");
  return c;
}

namespace {

double short_rate(const TwinRun& run, double horizon) {
  double rate = 0.0;
  for (std::size_t k = 0; k < run.t.size(); ++k)
    if (run.t[k] <= horizon + 1e-12 && run.distance[k] > 0.0)
      rate = std::max(rate, std::log(run.distance[k] / run.psi) / (1.0 + run.t[k]));
  return rate;
}

}  // namespace

StabilityCalibration calibrate_stability(const std::vector<TwinRun>& runs, double short_horizon, double safety) {
  std::vector<const TwinRun*> used;
  for (const auto& r : runs)
    if (r.r > 0.0) used.push_back(&r);
  if (used.empty()) throw ConfigInvalid("calibration needs at least one perturbed run");
  StabilityCalibration cal;
  cal.safety = safety;
  cal.short_horizon = short_horizon;
  cal.runs = used.size();
  double best_spread = INFINITY;
  for (int i = 1; i <= 19; ++i) {
    const double eta = 0.05 * i;
    double lo = INFINITY, hi = 0.0;
    for (const auto* r : used) {
      const double q = r->sup_distance / (r->r + std::pow(r->psi, eta));
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    const double spread = hi / lo;
    if (spread < best_spread) {
      best_spread = spread;
      cal.eta = eta;
      cal.C = hi * safety;
    }
  }
  double rate = 0.0;
  for (const auto* r : used) rate = std::max(rate, short_rate(*r, short_horizon));
  // the short-horizon form only ever needs a nonnegative rate
  cal.C_short = rate * safety;
  return cal;
}

StabilityVerdict twin_run_stability(const TwinRun& run, const StabilityCalibration& cal) {
  StabilityVerdict v;
  v.sup_distance = run.sup_distance;
  v.modulus_value = cal.C * (run.r + std::pow(run.psi, cal.eta));
  v.pass_modulus = v.sup_distance <= v.modulus_value;
  for (std::size_t k = 0; k < run.t.size(); ++k) {
    if (run.t[k] > cal.short_horizon + 1e-12) continue;
    const double bound = run.psi * std::exp(cal.C_short * (1.0 + run.t[k]));
    v.short_ratio = std::max(v.short_ratio, bound > 0.0 ? run.distance[k] / bound : (run.distance[k] > 0.0 ? INFINITY : 0.0));
  }
  v.pass_short = v.short_ratio <= 1.0;
  v.pass = v.pass_modulus && v.pass_short;
  return v;
}

StabilityVerdict twin_run_stability(const DvmTrajectory& F, const GridDensity& G0, const GridCollision& op,
                                    const EvolveOptions& opts, const StabilityCalibration& cal, TwinRun* run_out) {
  TwinRun run = twin_run(F, G0, op, opts);
  const auto v = twin_run_stability(run, cal);
  if (run_out) *run_out = std::move(run);
  return v;
}

}  // namespace boltz
