#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace elstab {

/// Process exit codes.
enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,
  exit_usage = 2,
  exit_hypothesis = 3,
  exit_solver = 4,
};

/// Runs the command line (without the program name) and returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace elstab
