#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace utrad::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Parses the command line and runs one subcommand. `args` excludes the
/// program name. Returns 0 only when every output was written.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace utrad::cli
