#pragma once

#include <string>

namespace nucav {

// Shortest decimal text that parses back to exactly `v` ("nan", "inf"
// for non-finite values).
std::string format_double(double v);

// printf-style "%.<digits>g".
std::string format_double(double v, int digits);

}  // namespace nucav
