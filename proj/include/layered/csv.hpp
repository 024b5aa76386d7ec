#pragma once

#include <cstdio>
#include <string>

namespace layered {

// Fixed 17 significant digits; -0 is written as 0 so outputs are stable.
inline std::string fmt17(double x) {
    if (x == 0.0) x = 0.0;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace layered
