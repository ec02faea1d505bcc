#pragma once

#include <iosfwd>

namespace pnclab {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerificationFailed = 1,
  kExitUsage = 2,
  kExitInvalidInput = 3,
};

/// Entry point of the `pnclab` tool; results go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pnclab
