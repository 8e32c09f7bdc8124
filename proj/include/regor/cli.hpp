#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace regor {

/// Exit codes: 0 success, 2 I/O fault, 3 bad config/spec/input format,
/// 4 other domain error, 64 usage error, 70 unexpected failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace regor
