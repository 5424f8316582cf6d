#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tinycore::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

// Runs one command line (args exclude the program name). Reads '-' inputs from
// `in`, writes reports to `out` and errors to `err`; returns the exit code.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace tinycore::cli
