#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ilw::cli {

/// Exit codes: 0 success or all checks pass, 1 a tolerance or numerical check
/// failed, 2 usage error.
enum Exit { ok = 0, check_failed = 1, usage = 2 };

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace ilw::cli
