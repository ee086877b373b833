#pragma once

// The `hedge` command-line front end, callable in-process for testing.

#include <ostream>
#include <string>
#include <vector>

namespace hedge::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,         // bad flags, unreadable or malformed input
  kNotConverged = 2,  // a solver hit its iteration cap or stalled
  kVerifyFailed = 3,  // a self-check in `verify` failed
};

/// Runs one invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hedge::cli
