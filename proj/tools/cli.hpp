#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace drfr::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kDataError = 2;

// Runs the `drfr` command line; `args` excludes the program name.
// Results go to `out`, progress and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace drfr::cli
