#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace linea {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;     // bad input files, checker violations
inline constexpr int kExitUsage = 2;       // unknown flags or missing arguments
inline constexpr int kExitInfeasible = 3;  // no schedule exists, or the oracle refuses
inline constexpr int kExitNoSolution = 4;  // a limit stopped the solve before any schedule

/// Runs the `linea` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace linea
