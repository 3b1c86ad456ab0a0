#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kitepilot {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast invariant checks over the kinematics, plant, controller and sysid
/// modules. Each check is independent; a failure never stops the others.
std::vector<CheckResult> run_selftest();

/// Prints one PASS/FAIL line per check; returns true when all passed.
bool report(std::ostream& out, const std::vector<CheckResult>& results);

}  // namespace kitepilot
