#pragma once

#include <string>
#include <vector>

namespace magzoll {

/// Exit codes of the batch driver.
enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitNotZoll = 2 };

/// Runs one subcommand; args excludes the program name.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace magzoll
