#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gpemu::cli {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitCompute = 3;

/// Runs one command. `args` excludes the program name. Diagnostics go to
/// `err`, short human-readable summaries to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gpemu::cli
