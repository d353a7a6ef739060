#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace flamedet {

/// Runs the command-line interface. Exit codes: 0 success, 1 usage or
/// configuration error, 2 I/O or format error, 3 validation failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flamedet
