#pragma once

#include <string>
#include <vector>

#include "platoon/engine.hpp"

namespace platoon {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct AcceptanceOptions {
  std::string scenario_dir = PLATOON_SCENARIO_DIR;
  /// Multiplies every controller gain of every scenario (sensitivity check).
  double gain_scale = 1.0;
};

/// Loads `<dir>/<name>.scenario` and applies the gain scale.
ScenarioSpec load_bundled(const AcceptanceOptions& opt, const std::string& name);

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {});

/// One "PASS|FAIL  <id> <name>: <detail>" line per criterion.
std::string format_results(const std::vector<CriterionResult>& results);

}  // namespace platoon
