#pragma once

#include <cstdio>
#include <string>

namespace semg {

// Shortest round-trip-exact decimal form of a double; every float the
// project persists (checkpoints, CSV reports) goes through this one
// formatter so identical values always serialize to identical bytes.
inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace semg
