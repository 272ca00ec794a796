#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace superhedge {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,       // bad flags, unreadable or malformed input files
  kExitAip = 2,         // the model admits immediate profit
  kExitValidation = 3,  // invalid values or an oracle tolerance breach
};

/// Runs the command line `args` (without the program name), writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace superhedge
