#pragma once

#include <string>

namespace matsqrt {

// Number formatting shared by every CSV writer: printf %.17g.
std::string format_double(double v);

} // namespace matsqrt
