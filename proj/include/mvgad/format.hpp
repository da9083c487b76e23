#pragma once

#include <string>
#include <string_view>

namespace mvgad {

// Shortest-safe round-trip text for a double: 17 significant digits.
std::string format_real(double v);

// Strict parse of a full token; throws ParseError naming `what`.
double parse_real(std::string_view token, std::string_view what);
long long parse_integer(std::string_view token, std::string_view what);

}  // namespace mvgad
