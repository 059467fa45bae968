#pragma once

#include <optional>
#include <string>
#include <vector>

#include "boltz/measures.hpp"
#include "json.hpp"

namespace boltz {

/// Moment production constant K_s(mass, ||F0||_2).
double k_s(double s, double mass, double energy_norm, double a2, double gamma);

/// K_s (1 + 1/t)^{(s-2)^+/gamma}.
double moment_envelope(double s, double t, double mass, double energy_norm, double a2, double gamma);

/// Exponential moment rate alpha(t) = 2^{-s0} (||F0||_0/||F0||_2)(1 - e^{-beta t}),
/// beta = 16 ||F0||_2 A2 gamma. s0 is a free parameter.
double exponential_moment_alpha(double t, double mass, double energy_norm, double a2, double gamma, double s0);

/// Collision frequency floor a for solutions in B_{1,0,1}:
/// [K_4(1, 1+N)(1 + max{1, 1/t0})^{2/gamma}]^{-(2-gamma)/2}.
double collision_frequency_floor(int dim, double gamma, double a2, double t0);

struct LowerEnvelopeParams {
  bool quadratic = false;  ///< true for the gamma = 2 branch
  double alpha = 1.0;
  double beta = 0.0;
  double kappa = 0.0;
};

LowerEnvelopeParams lower_envelope_params(double rho, double T, double gamma, int dim);

/// Lower bound for ||F_t - M||_0 given d0 = ||F_0 - M||_0 in [0, 2 rho].
double lower_envelope(double t, double rho, double T, double gamma, double d0, int dim);

/// 2(N+1) d log(4/d): bound of ||F - M||_2 by d = ||F - M||_0 in B_{1,0,1}.
double weighted_from_l1_bound(double d, int dim);

/// Threshold D0 splitting the two regimes of the stability argument.
double stability_threshold(double rho0, double T0, double energy_norm, int dim);

/// C_tau = 4 (K_{2+gamma} + ||F0||_2)(1 + 1/tau).
double restart_growth_rate(double tau, double mass, double energy_norm, double a2, double gamma);

/// C (r + Psi_{F0}(r)^eta).
double stability_modulus(const ParticleMeasure& F0, double r, double eta, double C);
double stability_modulus(const GridDensity& F0, double r, double eta, double C);

struct FitWindow {
  double t_min = 0.0;
  double t_max = 1e300;
  double floor = 0.0;  ///< points with distance <= floor are dropped
};

struct ExpFit {
  double C_hat = 0.0;
  double lambda_hat = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Least squares on log(distance) = log C - lambda t. Throws EmptyWindow
/// when fewer than two points remain.
ExpFit exp_fit(const std::vector<double>& times, const std::vector<double>& distances, const FitWindow& window);

/// Recorded relaxation history. moments[k] holds ||F_t||_k for k = 0..6;
/// exp_moment (optional) holds int e^{alpha(t)<v>^gamma} dF_t.
struct Trajectory {
  std::vector<double> t;
  std::vector<double> distance;
  std::vector<std::vector<double>> moments;
  std::vector<double> exp_moment;
};

struct EnvelopeReport {
  int dim = 3;
  double gamma = 1.0;
  double a2 = 0.0;
  double mass = 1.0;
  double energy_norm = 4.0;
  double T = 1.0;
  std::vector<std::pair<double, double>> k_table;  ///< (s, K_s)
  double t0 = 1.0;
  double a = 0.0;
  double s0 = 2.0;
  double beta_exp = 0.0;
  LowerEnvelopeParams lower;
  double d0 = 0.0;
  double stability_d0 = 0.0;
  std::optional<ExpFit> fit;
  std::optional<double> gap;
  double band_lo = 0.5;
  double band_hi = 1.5;
  std::vector<double> moment_orders{3.0, 4.0, 6.0};
};

/// Fills every constant from the initial data and the kernel.
EnvelopeReport make_envelope_report(int dim, double gamma, double a2, double mass, double energy_norm, double T,
                                    double t0 = 1.0, double s0 = 2.0);

nlohmann::json to_json(const EnvelopeReport& r);

struct Verdict {
  std::string check;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// Moment envelope, lower envelope, rate band and exponential moment checks,
/// each emitted only when the trajectory/report carries the data for it.
/// `lower_envelope_check` selects whether the distance column is compared
/// with the lower envelope (meaningful for L1 distances of densities).
std::vector<Verdict> envelope_verdict(const Trajectory& traj, const EnvelopeReport& report,
                                      bool lower_envelope_check = true);

bool all_pass(const std::vector<Verdict>& verdicts);

void write_verdict_csv(const std::vector<Verdict>& verdicts, const std::string& path,
                       const std::string& header_comment = "");

}  // namespace boltz
