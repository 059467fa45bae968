#pragma once

#include <memory>
#include <string>
#include <vector>

#include "boltz/grid_density.hpp"
#include "boltz/kernel.hpp"

namespace boltz {

struct DvmResolution {
  SphereResolution sphere{4, 8};  ///< fixed antipodal sigma rule shared by all pairs
  double overflow_tol = 1e-6;     ///< tolerated fraction of gain mass leaving the grid
};

/// Pairwise collision operator on a fixed grid. Every ordered node pair
/// contributes; post-collision velocities are deposited multilinearly, so
/// the gain term is exactly bilinear and symmetric in its two arguments.
class GridCollision {
 public:
  GridCollision(std::shared_ptr<const GridGeometry> geom, KernelSpec spec, DvmResolution res = {});

  [[nodiscard]] const GridGeometry& geometry() const { return *geom_; }
  [[nodiscard]] const std::shared_ptr<const GridGeometry>& geometry_ptr() const { return geom_; }
  [[nodiscard]] const KernelSpec& kernel() const { return spec_; }
  [[nodiscard]] const DvmResolution& resolution() const { return res_; }

  /// Strong-form Q+(f, g). Throws DomainOverflow past the tolerance.
  [[nodiscard]] GridDensity qplus(const GridDensity& f, const GridDensity& g) const;
  /// A0 * integral |v - v*|^gamma g(v*) dv* at every node.
  [[nodiscard]] std::vector<double> loss_rate(const GridDensity& g) const;
  /// Q-(f, g) = f * loss_rate(g).
  [[nodiscard]] GridDensity qminus(const GridDensity& f, const GridDensity& g) const;

  /// Gain mass dropped outside the grid by the last qplus call.
  [[nodiscard]] double last_overflow() const { return last_overflow_; }

 private:
  std::shared_ptr<const GridGeometry> geom_;
  KernelSpec spec_;
  DvmResolution res_;
  Eigen::MatrixXd sigma_;
  std::vector<double> sigma_w_;
  std::vector<std::vector<int>> offsets_;  ///< lexicographically positive lattice offsets
  mutable double last_overflow_ = 0.0;
};

struct QFields {
  GridDensity q_plus;
  GridDensity q_minus;
  double overflow_mass = 0.0;
};

QFields q_on_grid(const GridDensity& f, const GridDensity& g, const KernelSpec& spec, const DvmResolution& res = {});

struct EvolveOptions {
  double dt = 0.1;
  double t_end = 3.0;
  bool conservative = true;  ///< exact discrete (mass, momentum, energy) via the gain correction
};

/// Stored run. gain[k], loss[k], X[k], Y[k] belong to the step k -> k+1:
/// f[k+1] = f[k] X[k] + dt gain[k] Y[k].
struct DvmTrajectory {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<GridDensity> f;
  std::vector<GridDensity> gain;
  std::vector<std::vector<double>> loss;
  std::vector<std::vector<double>> X;
  std::vector<std::vector<double>> Y;
  double overflow_mass = 0.0;
  double clip_mass = 0.0;
};

/// Exponential-Euler run: X = exp(-dt L(f)), Y = exp(-dt L(f)/2) exp(lambda . (1, v, |v|^2)),
/// lambda solved so that the discrete conserved moments are exact.
DvmTrajectory evolve(const GridDensity& f0, const GridCollision& op, const EvolveOptions& opts);

struct FrequencyBound {
  double a_value = 0.0;
  double min_ratio = 0.0;  ///< min over nodes and t >= t0 of L_gamma(f_t)(v) / <v>^gamma
  bool pass = false;
};

FrequencyBound collision_frequency_bound(const DvmTrajectory& traj, double t0, const KernelSpec& spec);

/// Levels 0..n_max of the positive decomposition on the recorded times t >= t0.
struct DecompositionState {
  double t0 = 0.0;
  std::size_t k0 = 0;
  int n_max = 0;
  std::vector<double> t;
  std::vector<std::vector<GridDensity>> f_n;  ///< [level][time]
  std::vector<std::vector<GridDensity>> h_n;
  std::vector<std::vector<double>> log_E;     ///< -log E_{t0}^{t} per node, [time][node]
};

DecompositionState decompose(const DvmTrajectory& traj, double t0, int n_max, const GridCollision& op);

struct DecompositionRow {
  double t = 0.0;
  int n = 0;
  double l1_f = 0.0;  ///< ||f^n_t||_{L^1_2}
  double l1_h = 0.0;  ///< ||h^n_t||_{L^1_2}
  double identity_residual = 0.0;
  double envelope_rhs = 0.0;
  double min_value = 0.0;
  bool pass = false;
};

struct DecompositionSummary {
  std::vector<DecompositionRow> rows;
  double a = 0.0;
  double max_identity_residual = 0.0;
  double min_node_value = 0.0;
  bool damping_ordering = true;  ///< E_{t1}^t <= e^{-a(t-t1)} at every node and time pair
  std::vector<double> sup_value;  ///< per level: max node value of f^n over t
  std::vector<double> lipschitz;  ///< per level: max ||f^n_{k+1} - f^n_k||_{L^1} / dt
  bool pass = false;
};

DecompositionSummary decomposition_report(const DecompositionState& state, const DvmTrajectory& traj,
                                          const KernelSpec& spec, double identity_tol = 1e-6);

void write_decomposition_csv(const DecompositionSummary& s, const std::string& path,
                             const std::string& header_comment = "");

}  // namespace boltz
