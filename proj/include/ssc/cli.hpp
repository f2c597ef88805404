#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ssc {

inline constexpr const char* kSpecVersion = "1.0";

// Exit codes: stable contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitInternal = 3;

/// Runs `ssc <subcommand> ...`; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ssc
