#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace slap::cli {

/// Parses and runs one command line (without argv[0]). Returns the process
/// exit code: 0 success, 1 usage error (bad flags, infeasible grid/layer
/// shapes), 2 data or format error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace slap::cli
