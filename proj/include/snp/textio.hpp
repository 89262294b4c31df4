#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "snp/errors.hpp"

namespace snp {

/// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& context) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw IoError(context + ": cannot parse '" + std::string(text) + "' as a number");
    }
    return value;
}

}  // namespace snp
