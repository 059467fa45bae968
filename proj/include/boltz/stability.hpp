#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "boltz/dvm.hpp"
#include "boltz/measures.hpp"

namespace boltz {

/// Distance trace between two DVM solutions started at F0 and G0.
struct TwinRun {
  std::vector<double> t;
  std::vector<double> distance;  ///< ||F_t - G_t||_2 at every recorded time
  double r = 0.0;                ///< ||F0 - G0||_2
  double psi = 0.0;              ///< Psi_{F0}(r)
  double sup_distance = 0.0;
};

/// Evolves G0 and compares with an existing trajectory of F0 on the same grid and time step.
TwinRun twin_run(const DvmTrajectory& F, const GridDensity& G0, const GridCollision& op, const EvolveOptions& opts);

/// Constants of C (r + Psi(r)^eta) and of Psi(r) e^{C_short (1 + t)}, fitted once and then locked.
struct StabilityCalibration {
  double C = 0.0;
  double eta = 0.5;
  double C_short = 0.0;
  double short_horizon = 1.0;
  double safety = 1.25;
  std::size_t runs = 0;
};

nlohmann::json to_json(const StabilityCalibration& c);
StabilityCalibration calibration_from_json(const nlohmann::json& j);

/// For every eta on a grid in (0, 1) takes the smallest C covering all runs and keeps
/// the eta with the least spread of sup_distance / (r + Psi^eta); C_short is the
/// smallest rate covering the runs up to the horizon. Both are multiplied by `safety`.
StabilityCalibration calibrate_stability(const std::vector<TwinRun>& runs, double short_horizon = 1.0,
                                         double safety = 1.25);

struct StabilityVerdict {
  double sup_distance = 0.0;
  double modulus_value = 0.0;
  double short_ratio = 0.0;  ///< max over t <= horizon of distance / (Psi e^{C_short (1 + t)})
  bool pass_modulus = false;
  bool pass_short = false;
  bool pass = false;
};

StabilityVerdict twin_run_stability(const TwinRun& run, const StabilityCalibration& cal);

/// Convenience: psi, evolution and verdict in one call.
StabilityVerdict twin_run_stability(const DvmTrajectory& F, const GridDensity& G0, const GridCollision& op,
                                    const EvolveOptions& opts, const StabilityCalibration& cal,
                                    TwinRun* run_out = nullptr);

}  // namespace boltz
