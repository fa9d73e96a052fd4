#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qs3orao::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kParseError = 2, kConfigError = 3, kNumericError = 4 };

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qs3orao::cli
