#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sojourn {

struct CriterionResult {
  std::string id;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct ValidateOptions {
  bool fast = false;            // reduced Monte Carlo sizes for the big suites
  std::uint64_t seed = 7;
};

/// Suite names accepted by run_validate_suite (plus "all").
std::vector<std::string> validate_suite_names();

std::vector<CriterionResult> run_validate_suite(const std::string& name,
                                                const ValidateOptions& options);

std::vector<CriterionResult> run_all_suites(const ValidateOptions& options);

}  // namespace sojourn
