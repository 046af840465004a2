#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pairscore::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitPortInUse = 3;
inline constexpr int kExitUsage = 64;

/// Runs the command line `args` (program name excluded) and returns the exit
/// status. `serve` blocks until SIGINT or SIGTERM.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pairscore::cli
