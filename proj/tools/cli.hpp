#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hths::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kNumeric = 3;

// Runs the command line given without the program name. Results go to
// `out` unless --output names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hths::cli
