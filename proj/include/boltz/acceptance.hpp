#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace boltz {

struct SuiteOptions {
  std::string level = "fast";  ///< fast | full
  std::string out_dir = "runs/suite";
  std::string golden_dir = "tests/golden";
  double break_constant = 1.0;  ///< multiplies A2 in the constants check; != 1 injects a fault
  bool verbose = true;          ///< print one line per criterion as it finishes
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double value = 0.0;
  double bound = 0.0;
  std::string detail;
  double seconds = 0.0;
};

/// Runs the thirteen acceptance criteria in order.
std::vector<CriterionResult> run_acceptance(const SuiteOptions& opts);

nlohmann::json suite_summary(const std::vector<CriterionResult>& results, const SuiteOptions& opts);

std::string format_line(const CriterionResult& r);

}  // namespace boltz
