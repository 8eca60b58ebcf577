#ifndef PARAFORGE_CLI_HPP
#define PARAFORGE_CLI_HPP

namespace paraforge {

// Entry point behind tools/main.cpp. Exit codes: 0 success, 1 validation
// error, 2 runtime failure.
int run_cli(int argc, const char* const* argv);

}  // namespace paraforge

#endif
