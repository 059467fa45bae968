#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "boltz/acceptance.hpp"
#include "boltz/errors.hpp"
#include "boltz/scenarios.hpp"

namespace {

int cmd_run(const std::string& path, const std::vector<std::string>& sets, const std::string& out_dir) {
  try {
    auto config = boltz::load_config(path);
    for (const auto& s : sets) boltz::apply_override(config, s);
    const auto res = boltz::run_scenario(config, out_dir);
    std::printf("%s %s: %s\n", res.scenario.c_str(), res.pass ? "PASS" : "FAIL", res.summary.c_str());
    return res.pass ? 0 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int cmd_suite(boltz::SuiteOptions opts, const std::string& summary_path) {
  try {
    const auto results = boltz::run_acceptance(opts);
    const auto summary = boltz::suite_summary(results, opts);
    const std::string text = summary.dump(2);
    if (summary_path.empty() || summary_path == "-") {
      std::cout << text << '\n';
    } else {
      std::ofstream(summary_path) << text << '\n';
    }
    return summary["pass"].get<bool>() ? 0 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"boltz: Boltzmann relaxation experiments"};
  app.set_version_flag("--version", boltz::version_string());
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one scenario config");
  std::string config_path, run_out;
  std::vector<std::string> sets;
  run->add_option("config", config_path, "scenario config (JSON)")->required();
  run->add_option("--set", sets, "override key.path=value")->take_all();
  run->add_option("--out", run_out, "output directory (default: the config's output key)");

  auto* suite = app.add_subcommand("suite", "run the acceptance battery");
  boltz::SuiteOptions opts;
  std::string summary_path;
  suite->add_option("--level", opts.level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  suite->add_option("--out", opts.out_dir, "directory for scenario outputs");
  suite->add_option("--golden", opts.golden_dir, "directory with locked golden files");
  suite->add_option("--break-constant", opts.break_constant, "scale A2 in the constants check (fault injection)");
  suite->add_option("--summary", summary_path, "summary JSON path (default: stdout)");

  CLI11_PARSE(app, argc, argv);
  if (*run) return cmd_run(config_path, sets, run_out);
  opts.verbose = true;
  return cmd_suite(opts, summary_path);
}
