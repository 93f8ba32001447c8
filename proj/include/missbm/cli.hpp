#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace missbm {

/// Runs `sbm-miss` with `args` (program name excluded). Returns the exit code:
/// 0 on success, 2 on bad input or usage, 3 on numerical failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "1:18", "2,4,6" or "3".
std::vector<int> parse_blocks(const std::string& text);

}  // namespace missbm
