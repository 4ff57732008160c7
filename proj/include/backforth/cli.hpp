#pragma once

#include <iosfwd>

namespace backforth::cli {

enum ExitCode : int { kHolds = 0, kFails = 1, kUsage = 2 };

/// Runs one command line. JSON goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace backforth::cli
