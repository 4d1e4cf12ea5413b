#pragma once

// Command-line frontend: train, evaluate, bench-info and ablate.

#include <string>
#include <vector>

namespace rlemmo {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitRuntime = 3;

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one command. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace rlemmo
