#pragma once

namespace robustreg {

/// Command-line entry point (the binary's main delegates here so the whole
/// surface is testable in-process).  Subcommands: fit, experiment, verify,
/// mean-demo, constants.  Exit codes: 0 success, 1 failed verification or
/// runtime error, 2 usage error.
int cli_run(int argc, const char* const* argv);

}  // namespace robustreg
