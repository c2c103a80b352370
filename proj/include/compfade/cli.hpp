#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace compfade::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

/// Runs the command line `args` (program name excluded). Tables and reports
/// go to `out` unless redirected with --out; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool color = false);

}  // namespace compfade::cli
