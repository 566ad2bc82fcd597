#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qswitch {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitSolver = 3,
};

/// Entry point of the `qswitch` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qswitch
