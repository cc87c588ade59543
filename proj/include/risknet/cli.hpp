#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace risknet {

/// Entry point of the command-line tool. `args` excludes the program name.
/// Returns 0 on success, 1 on a usage error, 2 on a data error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace risknet
