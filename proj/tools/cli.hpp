#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rsketch::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 1,
    kOverflow = 2,
};

/// Runs the command line `args` (args[0] is the program name) and returns
/// the process exit code. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rsketch::cli
