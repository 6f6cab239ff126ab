#pragma once

#include <string>
#include <vector>

namespace spectral_ends {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct ValidateOptions {
  /// Replaces the square-root branch in the continuity suite with a sign-flipped variant,
  /// which that suite must detect.
  bool inject_branch_fault = false;
};

/// Oracle and property suites: rectangle NtD oracle, sigma monotonicity, counting
/// bound and counting identity, Bessel Wronskian, branch continuity, pencil oracle.
std::vector<SuiteResult> run_validation(const ValidateOptions& opt = {});

/// Individual suites, also used by the acceptance tests.
SuiteResult suite_rectangle_oracle();
SuiteResult suite_monotonicity();
SuiteResult suite_counting();
SuiteResult suite_wronskian();
SuiteResult suite_branch_continuity(bool inject_fault = false);
SuiteResult suite_pencil_oracle();

/// Worst relative error of the accelerated and direct rect-test NtD diagonals against the
/// analytic values coth(s)/s over the first `modes` transverse modes.
struct RectOracleError {
  double accelerated = 0.0;
  double direct = 0.0;
};
RectOracleError rect_oracle_error(int refine, double lambda_max, const std::vector<double>& lambdas, int modes);

}  // namespace spectral_ends
