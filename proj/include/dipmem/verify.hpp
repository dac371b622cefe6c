#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dipmem {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// Fast invariant checks over every model: closed-form efficiencies, the write
/// bound, continuity, analytic versus numeric free-space fields and the
/// free-space energy ledger. Each check runs in well under a second.
std::vector<CheckResult> run_invariant_suite();

/// One line per check; returns true when all passed.
bool report(const std::vector<CheckResult>& results, std::ostream& os);

}  // namespace dipmem
