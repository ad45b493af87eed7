#pragma once

#include <iosfwd>

namespace cece {

enum ExitCode : int { kExitOk = 0, kExitInput = 2, kExitPrecondition = 3, kExitValidation = 4 };

// Entry point behind the `cece` binary. Results go to `out` (and files under
// --out-dir); structured errors go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cece
