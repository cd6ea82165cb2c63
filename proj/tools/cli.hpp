#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace plad::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitAnomalous = 3;

/// Runs one command line (args[0] is the program name). `score` returns 3 for
/// an anomalous verdict.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace plad::cli
