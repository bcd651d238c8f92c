#pragma once

#include <string>
#include <string_view>

namespace gpemu {

/// Shortest round-trip decimal form; locale independent. Non-finite values
/// print as inf, -inf and nan.
std::string format_double(double v);

/// Locale-independent parse of a full field; throws InvalidArgument.
double parse_double(std::string_view text);

}  // namespace gpemu
