#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pgraft::app {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitConfig = 2,
    kExitBackend = 3,
    kExitNumeric = 4,
    kExitIo = 5,
};

/// Entry point of the pgraft tool; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Description of a dotted config flag as shown by --help.
const char* config_key_help(const std::string& dotted_key);

}  // namespace pgraft::app
