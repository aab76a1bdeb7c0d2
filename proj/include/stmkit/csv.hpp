// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors
#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace stmkit {

struct CsvRecord {
    std::vector<std::string> fields;
    std::size_t line = 0; // 1-based line the record starts on
};

// RFC 4180 reader: quoted fields, "" escapes, embedded newlines.
// Throws FormatError with a line number on malformed quoting.
std::vector<CsvRecord> parse_csv(std::istream& in);

// Quotes a field only when needed (comma, quote, newline).
std::string csv_escape(std::string_view field);

} // namespace stmkit
