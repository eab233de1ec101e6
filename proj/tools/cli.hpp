#pragma once

#include <string>
#include <vector>

namespace fbp::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kFailure = 1,        // I/O or unexpected error
    kMissingConfig = 2,
    kBadConfig = 3,
    kNotConverged = 4,   // iteration failed or a guard tripped
};

/// Entry point of the command-line tool; args[0] is the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace fbp::cli
