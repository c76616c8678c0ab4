#pragma once

#include <string>

namespace ilw {

/// Shortest decimal that parses back to the same binary64 value (at most 17 digits).
std::string fmt_double(double x);

/// Strict full-string parse; throws InvalidInput on trailing garbage.
double parse_double(const std::string& text);

} // namespace ilw
