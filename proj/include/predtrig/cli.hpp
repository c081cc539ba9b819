#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace predtrig::cli {

/// Process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kConfigError = 2,
  kNumericError = 3,
  kIoError = 4,
  kValidationFailed = 5,
  kValidationInconclusive = 6,
};

/// Entry point behind the predtrig executable. `args` excludes the program
/// name. CSV goes to --out or `out`; diagnostics go to `err` as a single line
/// "error: <category>: <message>".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace predtrig::cli
