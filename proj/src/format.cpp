#include "matsqrt/format.hpp"

#include <cstdio>

namespace matsqrt {

std::string format_double(double v) {
    char buf[32];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

} // namespace matsqrt
