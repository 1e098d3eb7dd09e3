#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wsnet {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInvalidConfig = 2,
  kExitDivergence = 3,
};

/// Entry point shared by the `wsnet` binary and the tests. `args` excludes
/// the program name. Subcommands: gen-synth, train, sweep, ablate, eval.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wsnet
