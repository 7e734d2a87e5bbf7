#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dronerf {

// Exit codes: 0 success, 2 bad usage or input rejected, 1 unexpected failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `dronerf` tool. Machine-readable results go to out,
// progress and diagnostics to err.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dronerf
