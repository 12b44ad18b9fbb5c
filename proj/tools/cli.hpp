#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace estprob::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

/// Runs the command line `args` (args[0] is the program name) and returns
/// the process exit code: 0 success, 2 input/usage error, 3 numeric failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace estprob::cli
