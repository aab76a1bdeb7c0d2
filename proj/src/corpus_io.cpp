// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors
//
// Text serialization of corpus artifacts. All numeric output goes through
// std::to_chars so files are locale-independent and round-trip exactly.

#include <fstream>
#include <sstream>

#include "stmkit/corpus.hpp"
#include "stmkit/csv.hpp"
#include "stmkit/errors.hpp"
#include "stmkit/numfmt.hpp"
#include "stmkit/sha256.hpp"

namespace stmkit {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot open file for writing: " + path.string());
    }
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open file: " + path.string());
    }
    return in;
}

std::vector<long> split_longs(const std::string& line, std::size_t line_no,
                              const std::filesystem::path& path) {
    std::vector<long> values;
    std::istringstream fields(line);
    std::string field;
    while (fields >> field) {
        try {
            values.push_back(parse_long(field));
        } catch (const FormatError&) {
            throw FormatError(path.string() + ": line " +
                              std::to_string(line_no) + ": expected integer, got '" +
                              field + "'");
        }
    }
    return values;
}

} // namespace

void save_dtm(const DocumentTermMatrix& dtm, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << dtm.n_docs() << ' ' << dtm.n_terms << ' ' << dtm.nnz() << '\n';
    for (int d = 0; d < dtm.n_docs(); ++d) {
        for (const auto& [v, count] : dtm.rows[static_cast<std::size_t>(d)]) {
            out << d << ' ' << v << ' ' << count << '\n';
        }
    }
    if (!out) {
        throw FormatError("write failed: " + path.string());
    }
}

DocumentTermMatrix load_dtm(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError(path.string() + ": empty document-term file");
    }
    const auto header = split_longs(line, 1, path);
    if (header.size() != 3 || header[0] < 0 || header[1] < 0 || header[2] < 0) {
        throw FormatError(path.string() +
                          ": header must be 'n_docs n_terms nnz'");
    }
    DocumentTermMatrix dtm;
    dtm.n_terms = static_cast<int>(header[1]);
    dtm.rows.resize(static_cast<std::size_t>(header[0]));

    std::size_t line_no = 1;
    std::size_t entries = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto triple = split_longs(line, line_no, path);
        if (triple.size() != 3) {
            throw FormatError(path.string() + ": line " +
                              std::to_string(line_no) +
                              ": expected 'doc term count'");
        }
        const long d = triple[0];
        const long v = triple[1];
        const long count = triple[2];
        if (d < 0 || d >= header[0] || v < 0 || v >= header[1] || count < 1) {
            throw FormatError(path.string() + ": line " +
                              std::to_string(line_no) + ": entry out of range");
        }
        auto& row = dtm.rows[static_cast<std::size_t>(d)];
        if (!row.empty() && row.back().first >= v) {
            throw FormatError(path.string() + ": line " +
                              std::to_string(line_no) +
                              ": term indices must be ascending within a document");
        }
        row.emplace_back(static_cast<int>(v), static_cast<int>(count));
        ++entries;
    }
    if (entries != static_cast<std::size_t>(header[2])) {
        throw FormatError(path.string() + ": expected " +
                          std::to_string(header[2]) + " entries, found " +
                          std::to_string(entries));
    }
    return dtm;
}

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
    auto out = open_out(path);
    for (const auto& term : vocab.terms) {
        out << term << '\n';
    }
    if (!out) {
        throw FormatError("write failed: " + path.string());
    }
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
    auto in = open_in(path);
    Vocabulary vocab;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (!vocab.terms.empty() && vocab.terms.back() >= line) {
            throw FormatError(path.string() +
                              ": vocabulary must be sorted and unique (near '" +
                              line + "')");
        }
        vocab.terms.push_back(line);
    }
    // Document frequencies live in the matrix, not the term list.
    vocab.doc_freq.assign(vocab.terms.size(), 0);
    return vocab;
}

void save_design(const PrevalenceDesign& design,
                 const std::filesystem::path& path) {
    auto out = open_out(path);
    for (std::size_t j = 0; j < design.column_names.size(); ++j) {
        if (j > 0) {
            out << ',';
        }
        out << csv_escape(design.column_names[j]);
    }
    out << '\n';
    for (int i = 0; i < design.n_docs(); ++i) {
        for (int j = 0; j < design.n_covariates(); ++j) {
            if (j > 0) {
                out << ',';
            }
            out << format_double(design.X(i, j));
        }
        out << '\n';
    }
    if (!out) {
        throw FormatError("write failed: " + path.string());
    }
}

PrevalenceDesign load_design(const std::filesystem::path& path) {
    auto in = open_in(path);
    const auto records = parse_csv(in);
    if (records.empty()) {
        throw FormatError(path.string() + ": missing design header");
    }
    PrevalenceDesign design;
    design.column_names = records.front().fields;
    const std::size_t p = design.column_names.size();
    design.X = Eigen::MatrixXd(static_cast<Eigen::Index>(records.size() - 1),
                               static_cast<Eigen::Index>(p));
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != p) {
            throw FormatError(path.string() + ": line " +
                              std::to_string(rec.line) + ": expected " +
                              std::to_string(p) + " fields");
        }
        for (std::size_t j = 0; j < p; ++j) {
            try {
                design.X(static_cast<Eigen::Index>(r - 1),
                         static_cast<Eigen::Index>(j)) =
                    parse_double(rec.fields[j]);
            } catch (const FormatError&) {
                throw FormatError(path.string() + ": line " +
                                  std::to_string(rec.line) +
                                  ": expected number, got '" + rec.fields[j] +
                                  "'");
            }
        }
    }
    return design;
}

std::string vocabulary_hash(const Vocabulary& vocab) {
    std::string joined;
    std::size_t total = 0;
    for (const auto& term : vocab.terms) {
        total += term.size() + 1;
    }
    joined.reserve(total);
    for (const auto& term : vocab.terms) {
        joined += term;
        joined += '\n';
    }
    return sha256_hex(joined);
}

} // namespace stmkit
