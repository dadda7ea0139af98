#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace edgeweyl::cli {

/// Process exit codes.
enum ExitCode : int {
    kSuccess = 0,
    kUsage = 2,
    kValidation = 3,
    kNumerical = 4,
};

/// Runs the command line (without the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Version string recorded in run manifests.
std::string tool_version();

}  // namespace edgeweyl::cli
