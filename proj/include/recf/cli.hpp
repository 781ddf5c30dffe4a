#pragma once

// Entry point for the command-line tool, separated from main() so tests can
// drive it in-process. Returns the process exit code:
//   0 success, 1 runtime failure (including fully diverged experiments),
//   2 usage error, 3 configuration error, 4 resource limit exceeded.

namespace recf {

int run_cli(int argc, const char* const* argv);

}  // namespace recf
