#pragma once

#include <iosfwd>

namespace nave::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,     // bad flags, validation failures
  kData = 3,      // unreadable or malformed input files
  kInternal = 4,
};

/// Entry point shared by the executable and the tests. Human-readable
/// progress goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nave::cli
