#include "boltz/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "boltz/errors.hpp"

namespace boltz {

double k_s(double s, double mass, double energy_norm, double a2, double gamma) {
  const double expo = std::max(s - 2.0, 0.0) / gamma;
  if (expo == 0.0) return energy_norm;
  const double base =
      std::pow(2.0, s + 7.0) * (energy_norm / mass) * (1.0 + 1.0 / (16.0 * energy_norm * a2 * gamma));
  return energy_norm * std::pow(base, expo);
}

double moment_envelope(double s, double t, double mass, double energy_norm, double a2, double gamma) {
  return k_s(s, mass, energy_norm, a2, gamma) * std::pow(1.0 + 1.0 / t, std::max(s - 2.0, 0.0) / gamma);
}

double exponential_moment_alpha(double t, double mass, double energy_norm, double a2, double gamma, double s0) {
  const double beta = 16.0 * energy_norm * a2 * gamma;
  return std::pow(2.0, -s0) * (mass / energy_norm) * (1.0 - std::exp(-beta * t));
}

double collision_frequency_floor(int dim, double gamma, double a2, double t0) {
  const double k4 = k_s(4.0, 1.0, 1.0 + dim, a2, gamma);
  const double growth = std::pow(1.0 + std::max(1.0, 1.0 / t0), 2.0 / gamma);
  return std::pow(k4 * growth, -(2.0 - gamma) / 2.0);
}

LowerEnvelopeParams lower_envelope_params(double rho, double T, double gamma, int dim) {
  LowerEnvelopeParams p;
  const double base = 64.0 * (dim + 1.0) * (dim + 1.0) * rho;
  if (gamma >= 2.0) {
    p.quadratic = true;
    p.kappa = base * T;
    return p;
  }
  p.alpha = std::pow(2.0 / gamma, gamma / (2.0 - gamma));
  p.beta = (1.0 - gamma / 2.0) * std::pow(base * std::pow(T, gamma / 2.0), 2.0 / (2.0 - gamma));
  return p;
}

double lower_envelope(double t, double rho, double T, double gamma, double d0, int dim) {
  if (!(d0 >= 0.0 && d0 <= 2.0 * rho)) throw InvalidD0("d0 must lie in [0, 2 rho]");
  if (d0 == 0.0) return 0.0;
  const LowerEnvelopeParams p = lower_envelope_params(rho, T, gamma, dim);
  if (p.quadratic) return 4.0 * rho * std::pow(d0 / (4.0 * rho), std::exp(p.kappa * t));
  // evaluated in logs so that astronomically small values underflow gracefully
  const double log_val = (1.0 - p.alpha) * std::log(4.0 * rho) + p.alpha * std::log(d0) -
                         p.beta * std::pow(t, 2.0 / (2.0 - gamma));
  return std::exp(log_val);
}

double weighted_from_l1_bound(double d, int dim) {
  if (d <= 0.0) return 0.0;
  return 2.0 * (dim + 1.0) * d * std::log(4.0 / d);
}

double stability_threshold(double rho0, double T0, double energy_norm, int dim) {
  const double x = energy_norm / (rho0 * rho0);
  const double inv = 4.0 * energy_norm / (dim * rho0 * rho0) + 6.0 / dim * x * x;
  return std::min(rho0 / 2.0, T0 / (2.0 * inv));
}

double restart_growth_rate(double tau, double mass, double energy_norm, double a2, double gamma) {
  return 4.0 * (k_s(2.0 + gamma, mass, energy_norm, a2, gamma) + energy_norm) * (1.0 + 1.0 / tau);
}

double stability_modulus(const ParticleMeasure& F0, double r, double eta, double C) {
  if (r <= 0.0) return 0.0;
  return C * (r + std::pow(psi_f0(F0, r), eta));
}

double stability_modulus(const GridDensity& F0, double r, double eta, double C) {
  if (r <= 0.0) return 0.0;
  return C * (r + std::pow(psi_f0(F0, r), eta));
}

ExpFit exp_fit(const std::vector<double>& times, const std::vector<double>& distances, const FitWindow& window) {
  if (times.size() != distances.size()) throw EmptyWindow("time and distance lengths differ");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i], d = distances[i];
    if (t < window.t_min || t > window.t_max || !(d > window.floor) || !(d > 0.0)) continue;
    const double y = std::log(d);
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    syy += y * y;
    ++m;
  }
  if (m < 2) throw EmptyWindow("fewer than two points above the floor inside the window");
  const double n = static_cast<double>(m);
  const double den = n * sxx - sx * sx;
  if (!(den > 0.0)) throw EmptyWindow("window holds a single time");
  const double slope = (n * sxy - sx * sy) / den;
  const double icept = (sy - slope * sx) / n;
  ExpFit fit;
  fit.C_hat = std::exp(icept);
  fit.lambda_hat = -slope;
  fit.points = m;
  const double syy_c = syy - sy * sy / n;
  const double ss_res = syy_c - slope * (sxy - sx * sy / n);
  fit.r2 = syy_c > 0.0 ? 1.0 - std::max(0.0, ss_res) / syy_c : 1.0;
  return fit;
}

EnvelopeReport make_envelope_report(int dim, double gamma, double a2, double mass, double energy_norm, double T,
                                    double t0, double s0) {
  EnvelopeReport r;
  r.dim = dim;
  r.gamma = gamma;
  r.a2 = a2;
  r.mass = mass;
  r.energy_norm = energy_norm;
  r.T = T;
  for (double s : {0.0, 2.0, 2.0 + gamma, 3.0, 4.0, 5.0, 6.0}) r.k_table.emplace_back(s, k_s(s, mass, energy_norm, a2, gamma));
  r.t0 = t0;
  r.a = collision_frequency_floor(dim, gamma, a2, t0);
  r.s0 = s0;
  r.beta_exp = 16.0 * energy_norm * a2 * gamma;
  r.lower = lower_envelope_params(mass, T, gamma, dim);
  r.stability_d0 = stability_threshold(mass, T, energy_norm, dim);
  return r;
}

nlohmann::json to_json(const EnvelopeReport& r) {
  nlohmann::json k = nlohmann::json::array();
  for (const auto& [s, v] : r.k_table) k.push_back({{"s", s}, {"K_s", v}});
  nlohmann::json j = {{"N", r.dim},
                      {"gamma", r.gamma},
                      {"A2", r.a2},
                      {"mass", r.mass},
                      {"energy_norm", r.energy_norm},
                      {"T", r.T},
                      {"K_s", k},
                      {"t0", r.t0},
                      {"a", r.a},
                      {"exp_moment", {{"s0", r.s0}, {"beta", r.beta_exp}}},
                      {"D0", r.stability_d0},
                      {"d0", r.d0}};
  if (r.lower.quadratic)
    j["lower_bound"] = {{"branch", "gamma=2"}, {"kappa", r.lower.kappa}};
  else
    j["lower_bound"] = {{"branch", "gamma<2"}, {"alpha", r.lower.alpha}, {"beta", r.lower.beta}};
  if (r.fit) j["fit"] = {{"C_hat", r.fit->C_hat}, {"lambda_hat", r.fit->lambda_hat}, {"r2", r.fit->r2}};
  if (r.gap) j["gap"] = *r.gap;
  j["rate_band"] = {r.band_lo, r.band_hi};
  return j;
}

std::vector<Verdict> envelope_verdict(const Trajectory& traj, const EnvelopeReport& report,
                                      bool lower_envelope_check) {
  std::vector<Verdict> out;
  for (double s : report.moment_orders) {
    const auto k = static_cast<std::size_t>(s);
    if (k >= traj.moments.size() || static_cast<double>(k) != s) continue;
    Verdict v{"moment_" + std::to_string(k), 0.0, 0.0, true};
    double worst = -INFINITY;
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
      if (!(traj.t[i] > 0.0)) continue;
      const double val = traj.moments[k][i];
      const double bnd = moment_envelope(s, traj.t[i], report.mass, report.energy_norm, report.a2, report.gamma);
      const double ratio = val / bnd;
      if (!std::isfinite(val) || ratio > worst) {
        worst = std::isfinite(val) ? ratio : INFINITY;
        v.value = val;
        v.bound = bnd;
      }
      if (!std::isfinite(val) || val > bnd) v.pass = false;
    }
    out.push_back(v);
  }
  if (lower_envelope_check && !traj.distance.empty() && report.d0 > 0.0) {
    Verdict v{"lower_envelope", INFINITY, 0.0, true};
    double worst = INFINITY;
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
      const double bnd = lower_envelope(traj.t[i], report.mass, report.T, report.gamma,
                                        std::min(report.d0, 2.0 * report.mass), report.dim);
      const double margin = traj.distance[i] - bnd;
      if (margin < worst) {
        worst = margin;
        v.value = traj.distance[i];
        v.bound = bnd;
      }
      if (traj.distance[i] < bnd) v.pass = false;
    }
    out.push_back(v);
  }
  if (report.fit && report.gap) {
    const double ratio = report.fit->lambda_hat / *report.gap;
    out.push_back({"rate_band", report.fit->lambda_hat, *report.gap,
                   ratio >= report.band_lo && ratio <= report.band_hi});
  }
  if (!traj.exp_moment.empty()) {
    Verdict v{"exp_moment", 0.0, 2.0 * report.mass, true};
    for (std::size_t i = 0; i < traj.exp_moment.size() && i < traj.t.size(); ++i) {
      if (!(traj.t[i] > 0.0)) continue;
      v.value = std::max(v.value, traj.exp_moment[i]);
      if (!std::isfinite(traj.exp_moment[i]) || traj.exp_moment[i] > v.bound) v.pass = false;
    }
    out.push_back(v);
  }
  return out;
}

bool all_pass(const std::vector<Verdict>& verdicts) {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

void write_verdict_csv(const std::vector<Verdict>& verdicts, const std::string& path,
                       const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw ConfigInvalid("cannot open " + path);
  if (!header_comment.empty()) out << header_comment << '\n';
  out << "check,value,bound,pass\n";
  out.precision(12);
  for (const auto& v : verdicts) out << v.check << ',' << v.value << ',' << v.bound << ',' << (v.pass ? 1 : 0) << '\n';
}

}  // namespace boltz
