#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace focal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // validation, evaluation or runtime failure
inline constexpr int kExitUsage = 2;

// Runs one invocation; args[0] is the program name. Data goes to `out`,
// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Stops a running `serve` subcommand (signal handlers and tests).
void request_stop();

}  // namespace focal::cli
