#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bandit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // infeasible program or failed validation
inline constexpr int kExitUsage = 2;    // bad arguments, unreadable or malformed input

/// Runs one command line (argv[0] is the program name). The JSON document
/// goes to `out` unless --output is given; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bandit::cli
