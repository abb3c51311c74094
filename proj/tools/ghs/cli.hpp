#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ghs {

/// Runs one `ghs` invocation. Exit codes: 0 ok, 1 runtime failure, 2 usage.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Asks a running `serve`, `forge-serve` or `mine --loop` to wind down.
void request_cli_shutdown();

}  // namespace ghs
