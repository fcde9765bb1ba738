#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gtap::cli {

// Process exit statuses; also listed in --help.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,       // unexpected internal error
  kExitUsage = 2,         // bad command line (unknown flag, missing value)
  kExitConfig = 3,        // invalid configuration or argument value
  kExitIo = 4,            // missing or unreadable/unwritable file
  kExitDivergence = 5,    // training or saliency produced non-finite numbers
  kExitFormat = 6,        // input file has the wrong format or version
  kExitHashMismatch = 7,  // report inputs come from different configs
};

// Runs the tool in-process. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gtap::cli
