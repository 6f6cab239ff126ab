#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace spectral_ends::cli {

enum ExitCode : int {
  kOk = 0,
  kSuiteFailure = 1,
  kInvalidFlags = 2,
  kNumericalFailure = 3,
};

/// Runs the command line `args` (without the program name). Documents go to `out` unless
/// --output names a file; diagnostics and usage text go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spectral_ends::cli
