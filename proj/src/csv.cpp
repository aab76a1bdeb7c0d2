// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors

#include "stmkit/csv.hpp"

#include <iterator>

#include "stmkit/errors.hpp"

namespace stmkit {

std::vector<CsvRecord> parse_csv(std::istream& in) {
    std::string data(std::istreambuf_iterator<char>(in), {});
    std::vector<CsvRecord> records;

    std::size_t line = 1;
    std::size_t i = 0;
    const std::size_t n = data.size();
    while (i < n) {
        CsvRecord rec;
        rec.line = line;
        std::string field;
        bool in_quotes = false;
        bool record_done = false;
        bool saw_any = false;
        while (i < n && !record_done) {
            const char c = data[i];
            if (in_quotes) {
                if (c == '"') {
                    if (i + 1 < n && data[i + 1] == '"') {
                        field.push_back('"');
                        i += 2;
                    } else {
                        in_quotes = false;
                        ++i;
                    }
                } else {
                    if (c == '\n') {
                        ++line;
                    }
                    field.push_back(c);
                    ++i;
                }
                continue;
            }
            switch (c) {
            case '"':
                if (!field.empty()) {
                    throw FormatError("line " + std::to_string(line) +
                                      ": unexpected quote inside unquoted field");
                }
                in_quotes = true;
                saw_any = true;
                ++i;
                break;
            case ',':
                rec.fields.push_back(std::move(field));
                field.clear();
                saw_any = true;
                ++i;
                break;
            case '\r':
                ++i;
                break;
            case '\n':
                ++line;
                ++i;
                record_done = true;
                break;
            default:
                field.push_back(c);
                saw_any = true;
                ++i;
                break;
            }
        }
        if (in_quotes) {
            throw FormatError("line " + std::to_string(rec.line) +
                              ": unterminated quoted field");
        }
        if (saw_any || !rec.fields.empty()) {
            rec.fields.push_back(std::move(field));
            records.push_back(std::move(rec));
        }
    }
    return records;
}

std::string csv_escape(std::string_view field) {
    const bool needs_quotes =
        field.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs_quotes) {
        return std::string(field);
    }
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (const char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace stmkit
