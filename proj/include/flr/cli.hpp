#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace flr::cli {

/// Entry point behind the binary, testable in-process. Exit codes:
/// 0 success, 1 runtime failure, 2 usage or configuration error.
/// Machine consumers pass --json; human diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flr::cli
