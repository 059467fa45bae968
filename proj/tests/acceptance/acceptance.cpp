#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "boltz/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  boltz::SuiteOptions opts;
  app.add_option("--level", opts.level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  app.add_option("--golden", opts.golden_dir, "golden directory");
  app.add_option("--out", opts.out_dir, "scenario output directory");
  CLI11_PARSE(app, argc, argv);
  opts.verbose = false;

  const auto results = boltz::run_acceptance(opts);
  int failed = 0;
  std::ofstream lines(std::filesystem::path(opts.out_dir) / "acceptance.txt");
  for (const auto& r : results) {
    const auto line = boltz::format_line(r);
    std::printf("%s\n", line.c_str());
    lines << line << '\n';
    failed += !r.pass;
  }
  std::printf("%d/%zu criteria pass (level %s)\n", static_cast<int>(results.size()) - failed, results.size(),
              opts.level.c_str());
  std::ofstream(std::filesystem::path(opts.out_dir) / "summary.json") << boltz::suite_summary(results, opts).dump(2)
                                                                      << '\n';
  return failed == 0 ? 0 : 1;
}
