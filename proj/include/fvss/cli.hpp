#pragma once

namespace fvss::cli {

// Entry point behind the `fvss` binary; factored out so tests can drive
// commands in-process. Returns the process exit code: 0 success, 1 user
// error, 2 internal failure.
int run_cli(int argc, char** argv);

}  // namespace fvss::cli
