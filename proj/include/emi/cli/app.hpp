#pragma once

#include <string>
#include <vector>

namespace emi::cli {

/// Parses arguments (argv[0] included) and runs the requested subcommand.
/// Returns the process exit code: 0 on success, 1 on a pipeline error,
/// 2 on a usage error.
int run_main(const std::vector<std::string>& args);

}  // namespace emi::cli
