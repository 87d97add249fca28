#pragma once

#include <charconv>
#include <ostream>

namespace fjc::detail {

// Shortest round-trip representation; stable across runs and locales.
inline void write_number(std::ostream& out, double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, p - buf);
}

}  // namespace fjc::detail
