#pragma once

#include <charconv>
#include <ostream>
#include <stdexcept>
#include <string>
#include <system_error>

namespace gdapl {

/// Shortest round-trippable text is not required; 17 significant digits always
/// re-parse to the same double and never depend on the global locale.
inline std::string format_g17(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline std::string format_fixed(double v, int digits) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
    std::string s(buf, res.ptr);
    if (s.find_first_not_of("-0.") == std::string::npos && !s.empty() && s[0] == '-') s.erase(0, 1);
    return s;
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument("parse_double: not a number: " + s);
    return v;
}

}  // namespace gdapl
