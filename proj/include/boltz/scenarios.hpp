#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "boltz/kernel.hpp"
#include "boltz/measures.hpp"

namespace boltz {

/// Version string baked in at configure time.
std::string version_string();

/// Stable 64-bit FNV-1a hash of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

/// Parses `key.path=value`; value is read as JSON when it parses, else as a string.
void apply_override(nlohmann::json& config, const std::string& assignment);

nlohmann::json load_config(const std::string& path);

/// Scenario names accepted in the "scenario" field.
const std::vector<std::string>& scenario_names();

/// Fills defaults and rejects unknown keys or wrong types (ConfigInvalid with a JSON pointer).
nlohmann::json resolve_config(const nlohmann::json& config);

struct ScenarioResult {
  std::string scenario;
  bool pass = false;
  std::string summary;
  nlohmann::json metrics;
  std::vector<std::string> files;
};

/// Runs a resolved or raw config. Outputs go to `output` from the config
/// unless `out_dir` is non-empty.
ScenarioResult run_scenario(const nlohmann::json& config, const std::string& out_dir = "");

/// Initial-data helpers shared with the acceptance suite.
KernelSpec kernel_from_config(const nlohmann::json& kernel);
ParticleMeasure particles_from_init(const nlohmann::json& init, int dim, std::size_t count, std::uint64_t seed);
GridDensity grid_from_init(const nlohmann::json& init, std::shared_ptr<const GridGeometry> geom);

}  // namespace boltz
