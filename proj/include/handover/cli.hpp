#pragma once

namespace handover {

/// Entry point for the `handover` command-line tool (subcommands: eval,
/// optimize, sweep, simulate). Exit codes: 0 success, 2 validation error,
/// 3 I/O error.
int run_cli(int argc, const char* const* argv);

}  // namespace handover
