#pragma once

namespace lcl {

// CLI entry point. Returns a process exit code: 0 success, 1 usage error,
// 2 numerical failure, 3 I/O error.
int run_cli(int argc, char** argv);

}  // namespace lcl
