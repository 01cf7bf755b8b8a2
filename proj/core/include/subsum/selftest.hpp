#pragma once

#include <string>
#include <vector>

namespace subsum {

// Test-harness hook: kSignFlip corrupts the sign-rule suite's computed terms
// so the failure path of the selftest can be exercised end to end.
enum class SelftestFault { kNone, kSignFlip };

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Embedded invariant suites: sign rule, product identity, tail soundness,
// greedy-vs-oracle. Deterministic and self-contained.
std::vector<SuiteResult> run_selftest(SelftestFault fault = SelftestFault::kNone);

}  // namespace subsum
