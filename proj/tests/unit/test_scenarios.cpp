#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "boltz/acceptance.hpp"
#include "boltz/errors.hpp"
#include "boltz/scenarios.hpp"

using namespace boltz;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("boltz_scenarios_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string rejection(const json& cfg) {
  try {
    resolve_config(cfg);
  } catch (const ConfigInvalid& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config validation names the offending key") {
  CHECK(rejection({{"scenario", "gap"}, {"bogus", 1}}).find("/bogus") != std::string::npos);
  CHECK(rejection({{"scenario", "gap"}, {"params", {{"degreez", 3}}}}).find("/params/degreez") != std::string::npos);
  CHECK(rejection({{"scenario", "gap"}, {"params", {{"l_max", "four"}}}}).find("/params/l_max") != std::string::npos);
  CHECK(rejection({{"scenario", "nope"}}).find("/scenario") != std::string::npos);
  CHECK(rejection({{"params", json::object()}}).find("/scenario") != std::string::npos);
  CHECK(rejection({{"scenario", "relax_dvm"}, {"init", {{"type", "maxwellian"}, {"u", {1.0, 2.0}}}}})
            .find("/init/u") != std::string::npos);
  CHECK(rejection({{"scenario", "relax_dvm"}, {"kernel", {{"N", 3}, {"gamma", -1.0}}}}).find("/kernel") !=
        std::string::npos);
  CHECK(rejection({{"scenario", "constants"}}).empty());
}

TEST_CASE("overrides and hashing") {
  json cfg = {{"scenario", "gap"}};
  apply_override(cfg, "params.l_max=3");
  apply_override(cfg, "kernel.gamma=0.5");
  apply_override(cfg, "output=somewhere");
  CHECK(cfg["params"]["l_max"] == 3);
  CHECK(cfg["kernel"]["gamma"] == 0.5);
  CHECK(cfg["output"] == "somewhere");
  CHECK_THROWS_AS(apply_override(cfg, "no_equals"), ConfigInvalid);
  CHECK(config_hash(cfg) == config_hash(json::parse(cfg.dump())));
  CHECK(config_hash(cfg).size() == 16);
  apply_override(cfg, "seed=2");
  CHECK(config_hash(cfg) != config_hash({{"scenario", "gap"}}));
}

TEST_CASE("constants scenario reports the standard values") {
  const auto dir = scratch("constants");
  const auto res = run_scenario({{"scenario", "constants"}, {"params", {{"inequality_samples", 20}}}}, dir.string());
  CHECK(res.pass);
  CHECK(res.metrics["K3"].get<double>() == doctest::Approx(16768.0).epsilon(1e-12));
  CHECK(res.metrics["K4"].get<double>() == doctest::Approx(281165824.0).epsilon(1e-12));
  CHECK(res.metrics["D0"].get<double>() == doctest::Approx(3.0 / 224.0).epsilon(1e-12));
  const json rep = json::parse(slurp(dir / "report.json"));
  CHECK(rep.contains("meta"));
  CHECK(rep["meta"]["config_hash"].get<std::string>().size() == 16);
  const auto csv = slurp(dir / "inequality.csv");
  CHECK(csv.rfind("# boltz ", 0) == 0);
}

TEST_CASE("malformed config leaves no outputs") {
  const auto dir = scratch("malformed");
  CHECK_THROWS_AS(run_scenario({{"scenario", "relax_dvm"}, {"params", {{"n", "big"}}}}, dir.string()), ConfigInvalid);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("equilibrium DVM run has a flat distance trace") {
  const auto dir = scratch("equilibrium");
  const auto res = run_scenario({{"scenario", "relax_dvm"},
                                 {"init", {{"type", "maxwellian"}, {"rho", 1.0}, {"u", {0.0, 0.0, 0.0}}, {"T", 1.0}}},
                                 {"params", {{"n", 13}, {"R", 6.0}, {"t_end", 0.6}}}},
                                dir.string());
  CHECK(res.pass);
  // the grid equilibrium differs from the sampled Maxwellian by O(h) in L1
  CHECK(res.metrics["d0"].get<double>() < 1e-6);
  CHECK(res.metrics["final_distance"].get<double>() < 0.02);
  CHECK(res.metrics["drift"].get<double>() < 1e-10);
}

TEST_CASE("same config and seed give identical CSV files") {
  const json cfg = {{"scenario", "relax_dsmc"},
                    {"params", {{"particles", 2000}, {"t_end", 0.5}, {"rate_check", false}}}};
  const auto a = scratch("det_a"), b = scratch("det_b");
  run_scenario(cfg, a.string());
  run_scenario(cfg, b.string());
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
  CHECK(slurp(a / "verdicts.csv") == slurp(b / "verdicts.csv"));
  CHECK(slurp(a / "trajectory.csv").rfind("# boltz ", 0) == 0);
}

TEST_CASE("mehler probe on a Maxwellian and on two atoms") {
  const auto m = run_scenario({{"scenario", "mehler_probe"}, {"params", {{"samples", 20000}}}},
                              scratch("mehler_m").string());
  CHECK(m.pass);
  const auto a = run_scenario(
      {{"scenario", "mehler_probe"},
       {"init", {{"type", "atoms"}, {"velocities", {{1.2, 0.1, -0.1}, {-1.2, 0.1, -0.1}}}}},
       {"params", {{"samples", 20000}}}},
      scratch("mehler_a").string());
  CHECK(a.pass);
  CHECK(a.metrics["monotone"].get<bool>());
}

TEST_CASE("suite summary marks failures") {
  std::vector<CriterionResult> rs{{1, "a", true, 0, 0, "", 0}, {2, "b", false, 0, 0, "", 0}};
  const auto s = suite_summary(rs, {});
  CHECK_FALSE(s["pass"].get<bool>());
  CHECK(s["failed"] == json::array({"b"}));
  CHECK(format_line(rs[1]).rfind("[FAIL]", 0) == 0);
}
