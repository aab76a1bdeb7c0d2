// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors
//
// Record ingestion and document-term / covariate matrix construction.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "stmkit/corpus.hpp"
#include "stmkit/csv.hpp"
#include "stmkit/errors.hpp"
#include "stmkit/numfmt.hpp"
#include "stmkit/parallel.hpp"

namespace stmkit {

namespace {

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
               c == '\v';
    });
}

std::string field_as_string(const nlohmann::json& obj, const char* key,
                            std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw FormatError("line " + std::to_string(line) + ": missing field '" +
                          key + "'");
    }
    if (it->is_string()) {
        return it->get<std::string>();
    }
    if (it->is_number_integer()) {
        return std::to_string(it->get<long long>());
    }
    throw FormatError("line " + std::to_string(line) + ": field '" + key +
                      "' must be a string");
}

int field_as_year(const nlohmann::json& obj, std::size_t line) {
    const auto it = obj.find("year");
    if (it == obj.end()) {
        throw FormatError("line " + std::to_string(line) +
                          ": missing field 'year'");
    }
    if (it->is_number_integer()) {
        return it->get<int>();
    }
    if (it->is_string()) {
        try {
            return static_cast<int>(parse_long(it->get<std::string>()));
        } catch (const FormatError&) {
            // fall through to the shared error below
        }
    }
    throw FormatError("line " + std::to_string(line) +
                      ": field 'year' must be an integer");
}

IngestResult ingest_jsonl(std::istream& in) {
    IngestResult result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) {
            continue;
        }
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError("line " + std::to_string(line_no) +
                              ": invalid JSON: " + e.what());
        }
        if (!obj.is_object()) {
            throw FormatError("line " + std::to_string(line_no) +
                              ": expected a JSON object");
        }
        RawDocument doc;
        doc.id = field_as_string(obj, "id", line_no);
        doc.journal = field_as_string(obj, "journal", line_no);
        doc.year = field_as_year(obj, line_no);
        const auto abs_it = obj.find("abstract");
        if (abs_it == obj.end() || abs_it->is_null()) {
            ++result.excluded_missing_abstract;
            result.excluded_ids.push_back(std::move(doc.id));
            continue;
        }
        if (!abs_it->is_string()) {
            throw FormatError("line " + std::to_string(line_no) +
                              ": field 'abstract' must be a string or null");
        }
        doc.abstract_text = abs_it->get<std::string>();
        if (is_blank(doc.abstract_text)) {
            ++result.excluded_missing_abstract;
            result.excluded_ids.push_back(std::move(doc.id));
            continue;
        }
        result.documents.push_back(std::move(doc));
    }
    return result;
}

IngestResult ingest_csv(std::istream& in) {
    const auto records = parse_csv(in);
    if (records.empty()) {
        throw FormatError("line 1: missing CSV header");
    }
    const auto& header = records.front().fields;
    const auto column = [&](const char* name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw FormatError("line " + std::to_string(records.front().line) +
                              ": CSV header lacks column '" + name + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t id_col = column("id");
    const std::size_t abstract_col = column("abstract");
    const std::size_t journal_col = column("journal");
    const std::size_t year_col = column("year");

    IngestResult result;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != header.size()) {
            throw FormatError("line " + std::to_string(rec.line) + ": expected " +
                              std::to_string(header.size()) + " fields, got " +
                              std::to_string(rec.fields.size()));
        }
        RawDocument doc;
        doc.id = rec.fields[id_col];
        doc.journal = rec.fields[journal_col];
        try {
            doc.year = static_cast<int>(parse_long(rec.fields[year_col]));
        } catch (const FormatError&) {
            throw FormatError("line " + std::to_string(rec.line) +
                              ": field 'year' must be an integer, got '" +
                              rec.fields[year_col] + "'");
        }
        if (is_blank(rec.fields[abstract_col])) {
            ++result.excluded_missing_abstract;
            result.excluded_ids.push_back(std::move(doc.id));
            continue;
        }
        doc.abstract_text = rec.fields[abstract_col];
        result.documents.push_back(std::move(doc));
    }
    return result;
}

} // namespace

int Vocabulary::index_of(std::string_view term) const {
    if (!index_built_) {
        index_.reserve(terms.size());
        for (std::size_t i = 0; i < terms.size(); ++i) {
            index_.emplace(terms[i], static_cast<int>(i));
        }
        index_built_ = true;
    }
    const auto it = index_.find(std::string(term));
    return it == index_.end() ? -1 : it->second;
}

std::size_t DocumentTermMatrix::nnz() const {
    std::size_t total = 0;
    for (const auto& row : rows) {
        total += row.size();
    }
    return total;
}

long long DocumentTermMatrix::doc_total(int d) const {
    long long total = 0;
    for (const auto& [term, count] : rows[static_cast<std::size_t>(d)]) {
        total += count;
    }
    return total;
}

long long DocumentTermMatrix::total_tokens() const {
    long long total = 0;
    for (int d = 0; d < n_docs(); ++d) {
        total += doc_total(d);
    }
    return total;
}

IngestResult ingest_records(const std::filesystem::path& path,
                            IngestFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open input file: " + path.string());
    }
    IngestResult result =
        format == IngestFormat::jsonl ? ingest_jsonl(in) : ingest_csv(in);

    std::unordered_set<std::string> seen;
    seen.reserve(result.documents.size());
    for (const auto& doc : result.documents) {
        if (!seen.insert(doc.id).second) {
            throw ValidationError("duplicate document id: " + doc.id);
        }
        if (doc.year <= 0) {
            throw ValidationError("document " + doc.id +
                                  " has non-positive year " +
                                  std::to_string(doc.year));
        }
    }
    return result;
}

Vocabulary build_vocabulary(const std::vector<TokenizedDocument>& docs,
                            int min_df) {
    if (min_df < 1) {
        throw ValidationError("min_df must be >= 1, got " +
                              std::to_string(min_df));
    }
    std::unordered_map<std::string, int> df;
    std::vector<std::string_view> uniq;
    for (const auto& doc : docs) {
        uniq.assign(doc.tokens.begin(), doc.tokens.end());
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        for (const auto term : uniq) {
            ++df[std::string(term)];
        }
    }

    Vocabulary vocab;
    for (const auto& [term, count] : df) {
        if (count >= min_df) {
            vocab.terms.push_back(term);
        }
    }
    std::sort(vocab.terms.begin(), vocab.terms.end());
    vocab.doc_freq.reserve(vocab.terms.size());
    for (const auto& term : vocab.terms) {
        vocab.doc_freq.push_back(df.at(term));
    }
    return vocab;
}

DtmBuildResult build_dtm(const std::vector<TokenizedDocument>& docs,
                         const Vocabulary& vocab) {
    DtmBuildResult result;
    result.dtm.n_terms = vocab.size();
    result.dtm.rows.reserve(docs.size());

    std::map<int, int> counts; // ordered so rows come out index-sorted
    for (std::size_t i = 0; i < docs.size(); ++i) {
        counts.clear();
        for (const auto& token : docs[i].tokens) {
            const int v = vocab.index_of(token);
            if (v >= 0) {
                ++counts[v];
            }
        }
        if (counts.empty()) {
            result.dropped_ids.push_back(docs[i].id);
            continue;
        }
        std::vector<std::pair<int, int>> row(counts.begin(), counts.end());
        result.dtm.rows.push_back(std::move(row));
        result.kept_indices.push_back(static_cast<int>(i));
    }
    return result;
}

PrevalenceDesign build_design(const std::vector<RawDocument>& records,
                              const std::vector<std::string>& retained_ids,
                              YearScaling year_scaling) {
    std::unordered_map<std::string, const RawDocument*> by_id;
    by_id.reserve(records.size());
    for (const auto& rec : records) {
        by_id.emplace(rec.id, &rec);
    }

    std::vector<const RawDocument*> rows;
    rows.reserve(retained_ids.size());
    std::set<std::string> journal_levels;
    for (const auto& id : retained_ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw ValidationError("retained id not present in records: " + id);
        }
        if (it->second->journal.empty()) {
            throw ValidationError("document " + id + " has an empty journal");
        }
        rows.push_back(it->second);
        journal_levels.insert(it->second->journal);
    }

    const int d = static_cast<int>(rows.size());
    // Reference level = lexicographically smallest journal (absorbed by the
    // intercept); one dummy per remaining level.
    std::vector<std::string> dummy_levels(journal_levels.begin(),
                                          journal_levels.end());
    if (!dummy_levels.empty()) {
        dummy_levels.erase(dummy_levels.begin());
    }
    const int p = 1 + static_cast<int>(dummy_levels.size()) + 1;

    PrevalenceDesign design;
    design.X = Eigen::MatrixXd::Zero(d, p);
    design.column_names.push_back("intercept");
    for (const auto& level : dummy_levels) {
        design.column_names.push_back("journal_" + level);
    }
    design.column_names.push_back("year");

    std::unordered_map<std::string, int> dummy_col;
    for (std::size_t j = 0; j < dummy_levels.size(); ++j) {
        dummy_col.emplace(dummy_levels[j], 1 + static_cast<int>(j));
    }

    Eigen::VectorXd years(d);
    for (int i = 0; i < d; ++i) {
        design.X(i, 0) = 1.0;
        const auto it = dummy_col.find(rows[static_cast<std::size_t>(i)]->journal);
        if (it != dummy_col.end()) {
            design.X(i, it->second) = 1.0;
        }
        years(i) = static_cast<double>(rows[static_cast<std::size_t>(i)]->year);
    }

    if (year_scaling == YearScaling::center_scale && d > 0) {
        const double mean = years.mean();
        years.array() -= mean;
        // Sample standard deviation (n-1); a single year leaves the
        // centered column of zeros.
        double sd = 0.0;
        if (d > 1) {
            sd = std::sqrt(years.squaredNorm() / static_cast<double>(d - 1));
        }
        if (sd > 0.0) {
            years /= sd;
        }
    }
    design.X.col(p - 1) = years;
    return design;
}

CorpusArtifacts build_corpus(const std::vector<RawDocument>& records,
                             const CorpusConfig& config) {
    const int n = static_cast<int>(records.size());
    std::vector<TokenizedDocument> tokenized(records.size());
    parallel_blocks(n, config.threads, [&](int, int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            const auto& rec = records[static_cast<std::size_t>(i)];
            std::string cleaned =
                strip_boilerplate(rec.abstract_text, config.boilerplate);
            cleaned = normalize_equilibrium(cleaned);
            tokenized[static_cast<std::size_t>(i)] = {
                rec.id, preprocess(cleaned, config.preprocess)};
        }
    });

    CorpusArtifacts artifacts;
    artifacts.vocab = build_vocabulary(tokenized, config.min_df);
    auto built = build_dtm(tokenized, artifacts.vocab);
    artifacts.dtm = std::move(built.dtm);
    artifacts.dropped_empty_ids = std::move(built.dropped_ids);
    artifacts.doc_ids.reserve(built.kept_indices.size());
    for (const int idx : built.kept_indices) {
        artifacts.doc_ids.push_back(tokenized[static_cast<std::size_t>(idx)].id);
    }
    artifacts.design =
        build_design(records, artifacts.doc_ids, config.year_scaling);
    return artifacts;
}

} // namespace stmkit
