#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hcbr {

/// Process exit codes; one per failure class.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,    // unexpected exception
  kExitConfig = 2,      // bad arguments, unreadable or invalid inputs, schema mismatch
  kExitGeneration = 3,  // scenario generation could not satisfy its constraints
  kExitCorrupt = 4,     // recomputed ground truth disagrees with a file, or a corrupt dataset
  kExitTransport = 5,   // model endpoint failed after retries
};

/// Runs the command line `args` (without the program name). `color` enables
/// ANSI colour on error messages.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            bool color = false);

}  // namespace hcbr
