#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tdist {

/// Process exit codes of the command line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitParse = 1,       ///< unreadable or invalid input
  kExitInfeasible = 2,  ///< solve proved that no schedule exists; check found violations
  kExitTimeout = 3,     ///< solve was cut off before finding any schedule
  kExitStalled = 4,     ///< simulation gridlocked
};

/// Runs one command (`args` excludes the program name) and returns its exit
/// code. Normal output goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tdist
