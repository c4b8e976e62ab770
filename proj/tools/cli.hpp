#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cshap::cli {

/// Runs the command line `args` (without the program name) and returns the
/// process exit code: 0 success, 1 usage/config, 2 data, 3 forecaster,
/// 4 invariant violation.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cshap::cli
