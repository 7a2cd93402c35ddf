#pragma once

#include <string>
#include <vector>

namespace rann {

/// Dispatches one CLI invocation (args excludes the program name).
/// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 internal.
int run_cli(const std::vector<std::string>& args);

}  // namespace rann
