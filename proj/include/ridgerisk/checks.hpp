#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ridgerisk {

struct CheckTolerances {
  double kernel = 1e-8;         // relative, kernel form vs normal equations
  double mc_se = 3.0;           // Monte-Carlo standard errors
  double rotation = 1e-8;       // relative
  double alpha = 1e-10;         // golden-ratio case
  double v_in_alt = 1e-8;       // relative
  double monotone_slack = 1e-12;
};

struct CheckResult {
  std::string suite;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Oracle cross-checks on small seeded instances. Failures are entries, not throws.
[[nodiscard]] std::vector<CheckResult> run_checks(std::uint64_t seed,
                                                  const CheckTolerances& tolerances = {});

/// CSV with header suite,measured,tolerance,passed.
void write_check_csv(const std::vector<CheckResult>& results, std::ostream& out);

}  // namespace ridgerisk
