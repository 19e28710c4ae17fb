#pragma once

#include <cstdio>
#include <ostream>
#include <string>

namespace lifecycle {

// Fixed 12-significant-digit formatting keeps CSV output byte-stable and
// round-trip error far below every tolerance used downstream.
inline std::string csv_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

template <typename... Rest>
inline void csv_row(std::ostream& os, double first, Rest... rest) {
    os << csv_num(first);
    ((os << ',' << csv_num(rest)), ...);
    os << '\n';
}

}  // namespace lifecycle
