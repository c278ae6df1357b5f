#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wlogit::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_data = 2,
    exit_numerical = 3,
};

/// Runs one subcommand. `args` excludes the program name. Failures print a
/// single "error: <category>: <reason>" line on `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// --threads, else WLOGIT_THREADS, else hardware concurrency (at least 1).
unsigned resolve_threads(int requested);

}  // namespace wlogit::cli
