#pragma once

#include <cstdio>
#include <string>

namespace weylscope::detail {

/// Shortest text that is guaranteed to round-trip a double.
inline std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Compact label for a parameter value, e.g. "5" or "0.365".
inline std::string format_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace weylscope::detail
