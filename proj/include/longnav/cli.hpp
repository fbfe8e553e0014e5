#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace longnav {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // I/O or validation error
inline constexpr int kExitUsage = 2;

/// Entry point behind the `longnav` tool. `args` excludes the program name.
/// Subcommands: generate, replay, simulate, compare, report.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace longnav
