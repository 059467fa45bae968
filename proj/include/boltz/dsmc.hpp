#pragma once

#include <array>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "boltz/analysis.hpp"
#include "boltz/kernel.hpp"
#include "boltz/measures.hpp"

namespace boltz {

/// Equal-weight particle system evolving under the collision kernel.
struct Ensemble {
  ParticleMeasure particles;
  double time = 0.0;
  std::mt19937_64 rng;
  KernelSpec kernel;

  /// Requires equal weights and at least two particles.
  static Ensemble from_measure(ParticleMeasure F, KernelSpec kernel, std::uint64_t seed);

  [[nodiscard]] std::size_t size() const { return particles.size(); }
  [[nodiscard]] double mass() const { return particles.mass(); }
};

struct DsmcConfig {
  double dt = 0.05;
  double t_end = 5.0;
  double majorant = 0.0;  ///< bound for |v - v*|^gamma; <= 0 selects the automatic bound
  int record_every = 1;
  std::uint64_t seed = 1;
  BinSpec bins;
};

struct StepStats {
  std::size_t candidates = 0;
  std::size_t accepted = 0;
  int substeps = 1;
  double majorant = 0.0;
};

/// (2 max |v - mean|)^gamma, an upper bound for every pairwise |v - v*|^gamma.
double automatic_majorant(const Ensemble& e);

/// One Nanbu-Babovsky step of length dt. Throws MajorantViolated if a
/// candidate pair exceeds config.majorant; the ensemble is then unspecified.
StepStats step(Ensemble& e, const DsmcConfig& config);

/// step() with majorant refresh and retry from a saved state.
StepStats advance(Ensemble& e, DsmcConfig& config);

/// Samples of the Mehler transform I_n[F]: v = e^{-n} z + u + sqrt(1 - e^{-2n})(v* - u),
/// z ~ N(0, T I), v* ~ F / rho.
ParticleMeasure mehler_sample(const ParticleMeasure& F, double n, std::size_t count, std::uint64_t seed);

struct DsmcRecord {
  double t = 0.0;
  double dist_binned = 0.0;
  Vec momentum;
  std::array<double, 7> norms{};  ///< sum_i w_i <v_i>^k, k = 0..6
  double exp_moment = 0.0;        ///< sum_i w_i exp(alpha(t) <v_i>^gamma)
};

struct RelaxOptions {
  bool normalize = true;   ///< run on N(F0), time in normalized units
  double fit_t_min = 0.5;  ///< skip the initial transient
  double floor_factor = 3.0;
  double s0 = 2.0;
};

struct DsmcTrajectory {
  std::vector<DsmcRecord> rows;
  MaxwellianParams triple;
  double noise_floor = 0.0;
  std::optional<ExpFit> fit;
  FitWindow window;
  double max_triple_drift = 0.0;  ///< relative drift of (rho, u, T)
  std::size_t collisions = 0;
};

DsmcTrajectory relax_experiment(const ParticleMeasure& F0, const KernelSpec& kernel, DsmcConfig config,
                                const RelaxOptions& opts = {});

/// Moment/distance columns in the form used by envelope_verdict.
Trajectory as_trajectory(const DsmcTrajectory& tr);

void write_trajectory_csv(const DsmcTrajectory& tr, const std::string& path, const std::string& header_comment = "");

/// Student-t velocities with nu degrees of freedom (finite moments of order < nu).
ParticleMeasure heavy_tail_sample(int dim, double nu, std::size_t count, std::uint64_t seed);

}  // namespace boltz
