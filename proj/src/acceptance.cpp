#include "boltz/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

#include "boltz/analysis.hpp"
#include "boltz/errors.hpp"
#include "boltz/kernel.hpp"
#include "boltz/scenarios.hpp"

namespace boltz {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Two-temperature mixture used for the relaxation-rate run.
json two_temperature() {
  return {{"type", "mixture"},
          {"normalize", true},
          {"components", json::array({{{"weight", 0.5}, {"u", {1.0, 0.0, 0.0}}, {"T", 0.3}},
                                      {{"weight", 0.5}, {"u", {-1.0, 0.0, 0.0}}, {"T", 1.2}}})}};
}

struct Sizes {
  std::size_t mc_samples;
  std::size_t mehler_samples;
  int decompose_n;
  double decompose_R;
  std::vector<int> gap_degrees;
  std::size_t dsmc_particles;
  std::size_t heavy_particles;
  int inequality_samples;
};

Sizes sizes_for(const std::string& level) {
  if (level == "full") return {1000000, 1000000, 21, 6.0, {12, 14}, 100000, 100000, 1000};
  if (level == "fast") return {200000, 200000, 13, 5.5, {10, 12}, 100000, 20000, 1000};
  throw ConfigInvalid("suite level must be fast or full, got '" + level + "'");
}

double metric(const ScenarioResult& r, const char* key) { return r.metrics.at(key).get<double>(); }

/// Name of the first failing verdict in a scenario result, if any.
std::string failing_checks(const ScenarioResult& r) {
  std::string out;
  if (!r.metrics.contains("verdicts")) return out;
  for (const auto& v : r.metrics["verdicts"])
    if (!v["pass"].get<bool>()) out += (out.empty() ? "" : ",") + v["check"].get<std::string>();
  return out;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

struct PostCollisionCheck {
  double worst = 0.0;
  std::size_t samples = 0;
};

/// Momentum and energy of random pairs before and after a collision.
PostCollisionCheck post_collision_battery(std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  PostCollisionCheck out;
  for (std::size_t i = 0; i < samples; ++i) {
    const int dim = 2 + static_cast<int>(i % 3);
    Vec v(dim), vs(dim), sigma(dim);
    for (int d = 0; d < dim; ++d) {
      v[d] = 3.0 * nd(rng);
      vs[d] = 3.0 * nd(rng);
      sigma[d] = nd(rng);
    }
    sigma.normalize();
    const auto [vp, vsp] = post_collision(v, vs, sigma);
    const double scale = v.squaredNorm() + vs.squaredNorm();
    const double dp = ((vp + vsp) - (v + vs)).norm() / std::sqrt(scale);
    const double de = std::abs(vp.squaredNorm() + vsp.squaredNorm() - scale) / scale;
    out.worst = std::max({out.worst, dp, de});
    ++out.samples;
  }
  return out;
}

}  // namespace

std::string format_line(const CriterionResult& r) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "[%s] %2d %-22s value=%-12s bound=%-12s %7.1fs  ", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), fmt(r.value).c_str(), fmt(r.bound).c_str(), r.seconds);
  return std::string(buf) + r.detail;
}

std::vector<CriterionResult> run_acceptance(const SuiteOptions& opts) {
  const Sizes sz = sizes_for(opts.level);
  const fs::path root(opts.out_dir);
  fs::create_directories(root);
  std::vector<CriterionResult> results;

  auto scenario = [&](const std::string& dir, json cfg) {
    cfg["seed"] = cfg.value("seed", 1);
    return run_scenario(cfg, (root / dir).string());
  };
  auto timed = [&](int id, const std::string& name, const std::function<void(CriterionResult&)>& body) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
      body(r);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (opts.verbose) std::fprintf(stderr, "%s\n", format_line(r).c_str());
    results.push_back(r);
    return r;
  };

  ScenarioResult decomposition, dsmc;
  bool have_decomposition = false, have_dsmc = false;

  timed(2, "kernel_geometry", [&](CriterionResult& r) {
    const auto s = scenario("c02_pythagoras", {{"scenario", "gain_probe"},
                                               {"params", {{"probes", {"pythagoras"}}, {"pythagoras_samples", 100000}}}});
    const auto& m = s.metrics["pythagoras"];
    r.value = std::max(m["worst_dot"].get<double>(), m["worst_len"].get<double>());
    r.bound = 1e-10;
    r.pass = s.pass;
    r.detail = std::to_string(m["samples"].get<std::size_t>()) + " configurations, ordering " +
               (m["ordered"].get<bool>() ? "holds" : "violated");
  });

  timed(3, "representation", [&](CriterionResult& r) {
    const auto s = scenario("c03_representation",
                            {{"scenario", "gain_probe"},
                             {"params", {{"probes", {"representation"}}, {"mc_samples", sz.mc_samples}, {"z_max", 3.0}}}});
    r.value = s.metrics["representation"]["worst_z"].get<double>();
    r.bound = 3.0;
    r.pass = s.pass;
    r.detail = "5 cases, " + std::to_string(sz.mc_samples) + " samples each";
    if (!s.pass) r.detail += "; failed: " + failing_checks(s);
  });

  timed(4, "lp_scaling", [&](CriterionResult& r) {
    const auto s = scenario("c04_lp", {{"scenario", "gain_probe"}, {"params", {{"probes", {"lp"}}, {"lp_tol", 0.05}}}});
    double worst = 0.0;
    std::string detail;
    for (const auto& c : s.metrics["lp"]) {
      worst = std::max(worst, std::abs(c["slope"].get<double>() - c["predicted"].get<double>()));
      detail += (detail.empty() ? "" : "; ") + c["case"].get<std::string>() + " slope " +
                fmt(c["slope"].get<double>()) + " vs " + fmt(c["predicted"].get<double>());
    }
    r.value = worst;
    r.bound = 0.05;
    r.pass = s.pass;
    r.detail = detail;
  });

  timed(5, "mehler", [&](CriterionResult& r) {
    const auto m = scenario("c05_mehler_maxwellian",
                            {{"scenario", "mehler_probe"}, {"params", {{"samples", sz.mehler_samples}}}});
    const auto a = scenario(
        "c05_mehler_atoms",
        {{"scenario", "mehler_probe"},
         {"init", {{"type", "atoms"}, {"velocities", {{1.2, 0.1, -0.1}, {-1.2, 0.1, -0.1}}}, {"weights", {0.5, 0.5}}}},
         {"params", {{"samples", sz.mehler_samples}}}});
    r.value = std::max(metric(m, "worst_z"), metric(a, "worst_z"));
    r.bound = 4.0;
    r.pass = m.pass && a.pass;
    r.detail = std::string("two-atom binned distance ") + (a.metrics["monotone"].get<bool>() ? "decreasing" : "NOT decreasing") +
               " to " + fmt(metric(a, "final_distance"));
    if (!r.pass) r.detail += "; failed: " + failing_checks(m) + " " + failing_checks(a);
  });

  timed(6, "decomposition", [&](CriterionResult& r) {
    decomposition = scenario("c06_decompose", {{"scenario", "decompose"},
                                               {"params", {{"n", sz.decompose_n}, {"R", sz.decompose_R}}}});
    have_decomposition = true;
    r.value = metric(decomposition, "max_identity_residual");
    r.bound = 1e-6;
    const bool ok = r.value <= r.bound && metric(decomposition, "min_node_value") >= 0.0 &&
                    metric(decomposition, "h_envelope_ratio") <= 1.0;
    r.pass = ok;
    r.detail = std::to_string(sz.decompose_n) + "^3 grid, min node " + fmt(metric(decomposition, "min_node_value")) +
               ", h envelope ratio " + fmt(metric(decomposition, "h_envelope_ratio"));
  });

  timed(7, "collision_frequency", [&](CriterionResult& r) {
    if (!have_decomposition) throw ConfigInvalid("decomposition run missing");
    const double ratio = metric(decomposition, "frequency_min_ratio");
    const double a = metric(decomposition, "a");
    const double a_stated = 5.963e-5;
    r.value = ratio;
    r.bound = a;
    r.pass = ratio >= a && ratio >= a_stated;
    r.detail = "min L/<v>^gamma " + fmt(ratio) + " >= a=" + fmt(a) + " (1/33536) and >= 5.963e-5";
  });

  timed(8, "spectral_gap", [&](CriterionResult& r) {
    const auto s = scenario("c08_gap", {{"scenario", "gap"},
                                        {"params", {{"degrees", sz.gap_degrees},
                                                    {"scaling_pairs", {{2.0, 0.0, 1.0}, {1.0, 0.7, 4.0}}}}}});
    r.value = metric(s, "lambda_hat");
    r.bound = 0.0;
    r.pass = s.pass;
    r.detail = "basis change " + fmt(metric(s, "basis_stability")) + " (<= 0.02)";
    for (const auto& c : s.metrics["scaling"])
      r.detail += ", scaling " + fmt(c["ratio"].get<double>()) + "/" + fmt(c["expected"].get<double>());
    if (!s.pass) r.detail += "; failed: " + failing_checks(s);
  });

  timed(9, "relaxation_rate", [&](CriterionResult& r) {
    dsmc = scenario("c09_relax_dsmc", {{"scenario", "relax_dsmc"},
                                       {"init", two_temperature()},
                                       {"params", {{"particles", sz.dsmc_particles}}}});
    have_dsmc = true;
    const auto dvm = scenario("c09_relax_dvm", {{"scenario", "relax_dvm"}});
    r.value = metric(dsmc, "rate_ratio");
    r.bound = 1.5;
    const double ratio = r.value;
    bool lower_ok = true;
    for (const auto& v : dvm.metrics["verdicts"])
      if (v["check"] == "lower_envelope") lower_ok = v["pass"].get<bool>();
    r.pass = ratio >= 0.5 && ratio <= 1.5 && lower_ok;
    r.detail = "lambda_hat " + fmt(metric(dsmc, "lambda_hat")) + " vs gap " + fmt(metric(dsmc, "gap")) +
               " (band [0.5, 1.5]); DVM lower envelope " + (lower_ok ? "holds" : "crossed");
  });

  timed(10, "moment_production", [&](CriterionResult& r) {
    const auto s = scenario("c10_heavy_tail", {{"scenario", "relax_dsmc"},
                                               {"init", {{"type", "heavy_tail"}, {"nu", 5.0}}},
                                               {"params", {{"particles", sz.heavy_particles},
                                                           {"t_end", 2.0},
                                                           {"rate_check", false}}}});
    bool moments = true;
    int checked = 0;
    for (const auto& v : s.metrics["verdicts"]) {
      const std::string c = v["check"];
      if (c.rfind("moment_", 0) == 0) {
        moments = moments && v["pass"].get<bool>();
        ++checked;
      }
    }
    std::ifstream in(fs::path(root / "c10_heavy_tail" / "trajectory.csv"));
    std::string line;
    double worst = 0.0;
    bool finite = true;
    // norms 4 and 6 at t > 0 stay finite; value reports the largest ||F_t||_6 seen
    std::vector<std::string> header;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (header.empty()) {
        header = cells;
        continue;
      }
      const auto col = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? NAN : std::stod(cells[static_cast<std::size_t>(it - header.begin())]);
      };
      if (col("t") <= 0.0) continue;
      finite = finite && std::isfinite(col("m4")) && std::isfinite(col("m6"));
      worst = std::max(worst, col("m6"));
    }
    r.value = worst;
    r.bound = 0.0;
    r.pass = moments && finite && checked > 0;
    r.detail = std::to_string(checked) + " envelope checks (s = 3, 4, 6), nu = 5";
    if (!moments) r.detail += "; failed: " + failing_checks(s);
  });

  ScenarioResult constants;
  timed(11, "weighted_inequality", [&](CriterionResult& r) {
    constants = scenario("c11_c12_constants",
                         {{"scenario", "constants"},
                          {"params", {{"inequality_samples", sz.inequality_samples}, {"a2_scale", opts.break_constant}}}});
    const auto& q = constants.metrics["inequality"];
    r.value = q["worst_ratio"].get<double>();
    r.bound = 1.0;
    r.pass = q["failures"].get<int>() == 0 && q["atomic_margin"].get<double>() >= 0.38;
    r.detail = std::to_string(q["samples"].get<int>()) + " mixtures; atomic margin " +
               fmt(100.0 * q["atomic_margin"].get<double>()) + "% (>= 38%)";
  });

  timed(12, "constants_oracle", [&](CriterionResult& r) {
    const fs::path path = fs::path(opts.golden_dir) / "constants_oracle.json";
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open " + path.string());
    const json oracle = json::parse(in);
    const std::vector<std::pair<std::string, std::string>> keys{
        {"K3", "K3"}, {"K4", "K4"}, {"a", "a"}, {"alpha", "alpha_gamma1"}, {"beta", "beta_gamma1"},
        {"kappa", "kappa_gamma2"}, {"D0", "D0"}};
    double worst = 0.0;
    std::string failed;
    for (const auto& [o, m] : keys) {
      const double expect = oracle.at(o).at("value").get<double>();
      const double got = constants.metrics.at(m).get<double>();
      const double rel = std::abs(got - expect) / std::abs(expect);
      worst = std::max(worst, rel);
      if (!(rel <= 1e-12)) failed += (failed.empty() ? "" : ",") + o;
    }
    r.value = worst;
    r.bound = 1e-12;
    r.pass = failed.empty();
    r.detail = failed.empty() ? "K3 K4 a alpha beta kappa D0 match" : "mismatch: " + failed;
  });

  timed(13, "stability", [&](CriterionResult& r) {
    const auto s = scenario(
        "c13_stability",
        {{"scenario", "stability_twin"},
         {"params",
          {{"mode", "verify"}, {"calibration", (fs::path(opts.golden_dir) / "stability_calibration.json").string()}}}});
    double worst = 0.0;
    for (const auto& v : s.metrics["verdicts"]) {
      if (v["check"].get<std::string>().find("_modulus_") != std::string::npos)
        worst = std::max(worst, v["value"].get<double>() / std::max(v["bound"].get<double>(), 1e-300));
      else
        worst = std::max(worst, v["value"].get<double>());
    }
    r.value = worst;
    r.bound = 1.0;
    r.pass = s.pass;
    const auto& c = s.metrics["calibration"];
    r.detail = "locked C=" + fmt(c["C"].get<double>()) + " eta=" + fmt(c["eta"].get<double>()) +
               " C_short=" + fmt(c["C_short"].get<double>());
    if (!s.pass) r.detail += "; failed: " + failing_checks(s);
  });

  timed(1, "conservation", [&](CriterionResult& r) {
    const auto pc = post_collision_battery(100000, 7);
    const double dsmc_drift = have_dsmc ? metric(dsmc, "triple_drift") : INFINITY;
    const double dvm_drift = have_decomposition ? metric(decomposition, "drift") : INFINITY;
    r.value = pc.worst;
    r.bound = 1e-12;
    r.pass = pc.worst <= 1e-12 && dsmc_drift <= 1e-9 && dvm_drift <= 1e-10;
    r.detail = "DSMC drift " + fmt(dsmc_drift) + " (<= 1e-9), DVM drift " + fmt(dvm_drift) +
               " (<= 1e-10 with the conservative correction)";
  });

  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return results;
}

json suite_summary(const std::vector<CriterionResult>& results, const SuiteOptions& opts) {
  json out;
  out["version"] = version_string();
  out["level"] = opts.level;
  out["break_constant"] = opts.break_constant;
  bool pass = true;
  json rows = json::array();
  json failed = json::array();
  for (const auto& r : results) {
    pass = pass && r.pass;
    if (!r.pass) failed.push_back(r.name);
    rows.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"value", r.value}, {"bound", r.bound},
                    {"detail", r.detail}, {"seconds", r.seconds}});
  }
  out["criteria"] = rows;
  out["failed"] = failed;
  out["pass"] = pass;
  return out;
}

}  // namespace boltz
