#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lmsv {

// Exit codes: 0 ok, 1 other failure, 2 config or validation error, 3 numerical inconsistency.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitConsistency = 3;

int run_cli(int argc, char** argv);

/// args excludes the program name; JSON/CSV without --out goes to out.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lmsv
