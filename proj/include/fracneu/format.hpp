#pragma once

#include <charconv>
#include <string>

namespace fracneu {

/// Locale-independent decimal formatting at 17 significant digits; doubles
/// round-trip bit-exactly through this representation.
inline std::string fmt17(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

}  // namespace fracneu
