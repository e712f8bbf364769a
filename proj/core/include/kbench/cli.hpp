#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kbench::cli {

// Exit-code contract, stable for CI:
//   0  all instances passed
//   1  at least one test failure
//   2  infrastructure error
//   64 usage error (bad flags, unreadable/invalid input files)
inline constexpr int kExitPass = 0;
inline constexpr int kExitTestFailure = 1;
inline constexpr int kExitInfrastructure = 2;
inline constexpr int kExitUsage = 64;

// Entry point behind the `kbench` binary. The vector overload is directly
// testable; argv[0] is not included in `args`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace kbench::cli
