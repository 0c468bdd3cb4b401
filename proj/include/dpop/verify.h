#ifndef DPOP_VERIFY_H_
#define DPOP_VERIFY_H_

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "dpop/harness.h"

namespace dpop {

inline constexpr std::uint64_t kDefaultVerifySeed = 20240607;

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct VerifyReport {
  std::vector<CriterionResult> criteria;
  std::vector<ExperimentRow> rows;

  bool all_passed() const;
  std::string Csv() const;
};

// Acceptance criteria 1-14 (criterion 15 compares two runs). A criterion
// passes only if its checks hold within its runtime budget.
CriterionResult RunCriterion(int id, std::uint64_t seed,
                             std::vector<ExperimentRow>* rows);
VerifyReport RunVerify(std::uint64_t seed = kDefaultVerifySeed,
                       const std::set<int>& only = {});

// One line per criterion: "[PASS] 5 name (1.2 s): detail".
std::string FormatCriterion(const CriterionResult& result);

}  // namespace dpop

#endif  // DPOP_VERIFY_H_
