#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace abdiv {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidInput = 2;
inline constexpr int kExitUndefined = 3;
inline constexpr int kExitTooLarge = 4;

/// Runs the command line `args` (without the program name). Human-readable
/// output goes to `out`, diagnostics to `err`. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace abdiv
