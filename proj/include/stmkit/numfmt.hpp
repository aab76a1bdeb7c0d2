// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors
#pragma once

#include <charconv>
#include <cstdlib>
#include <string>
#include <string_view>

#include "stmkit/errors.hpp"

namespace stmkit {

// Locale-independent float formatting. All file output goes through these
// so reruns are byte-identical.

// Shortest representation that round-trips.
inline std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

// Fixed number of significant digits (general format).
inline std::string format_double(double x, int significant_digits) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x,
                             std::chars_format::general, significant_digits);
    return std::string(buf, res.ptr);
}

// Fixed decimals, e.g. the 4-decimal correlation rendering.
inline std::string format_fixed(double x, int decimals) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x,
                             std::chars_format::fixed, decimals);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double value = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw FormatError("not a number: '" + std::string(s) + "'");
    }
    return value;
}

inline long parse_long(std::string_view s) {
    long value = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw FormatError("not an integer: '" + std::string(s) + "'");
    }
    return value;
}

} // namespace stmkit
