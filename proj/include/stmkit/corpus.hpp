// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace stmkit {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct RawDocument {
    std::string id;
    std::string abstract_text;
    std::string journal;
    int year = 0;
};

struct IngestResult {
    std::vector<RawDocument> documents;
    std::size_t excluded_missing_abstract = 0;
    std::vector<std::string> excluded_ids; // ids of the excluded records
};

enum class IngestFormat { jsonl, csv };

struct TokenizedDocument {
    std::string id;
    std::vector<std::string> tokens;
};

struct Vocabulary {
    std::vector<std::string> terms; // lexicographically sorted, unique
    std::vector<int> doc_freq;      // per-term document frequency

    int size() const { return static_cast<int>(terms.size()); }
    // -1 when absent.
    int index_of(std::string_view term) const;

private:
    mutable std::unordered_map<std::string, int> index_;
    mutable bool index_built_ = false;
};

// Sparse per-document term counts; rows keep (term, count) pairs with
// strictly ascending term indices and counts >= 1.
struct DocumentTermMatrix {
    int n_terms = 0;
    std::vector<std::vector<std::pair<int, int>>> rows;

    int n_docs() const { return static_cast<int>(rows.size()); }
    std::size_t nnz() const;
    long long doc_total(int d) const;
    long long total_tokens() const;
};

struct DtmBuildResult {
    DocumentTermMatrix dtm;
    std::vector<int> kept_indices;          // positions into the input docs
    std::vector<std::string> dropped_ids;   // docs with no in-vocabulary token
};

enum class YearScaling { center_scale, raw };

struct PrevalenceDesign {
    Eigen::MatrixXd X; // D x P, first column all ones
    std::vector<std::string> column_names;

    int n_docs() const { return static_cast<int>(X.rows()); }
    int n_covariates() const { return static_cast<int>(X.cols()); }
};

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

// The copyright tails stripped from abstracts, including the variant with
// the missing 's'.
const std::vector<std::string>& default_boilerplate_phrases();

// Removes every occurrence of the given phrases plus "(c)" marks with an
// adjacent 4-digit year; whitespace around a removal collapses to a single
// space (dropped entirely at the ends). Text without matches is returned
// byte-identical. Idempotent.
std::string strip_boilerplate(std::string_view text);
std::string strip_boilerplate(std::string_view text,
                              const std::vector<std::string>& phrases);

// Case-insensitive whole-word "equilibrium"/"equilibria" -> "equilibri".
std::string normalize_equilibrium(std::string_view text);

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

struct PreprocessConfig {
    // Checked against surface tokens and again against stemmed tokens.
    std::unordered_set<std::string> stopwords;
    bool stem = true;
};

// Bundled SMART English list plus the publishing-jargon additions
// ("paper", "publish").
PreprocessConfig default_preprocess_config();

// One term per line, '#' starts a comment.
std::unordered_set<std::string> load_stopwords(std::istream& in);
std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path);
const std::vector<std::string>& default_custom_stopwords();

// Lowercase, map non-alphabetic bytes to spaces, split, drop stopwords,
// stem, drop tokens that stem to empty or to a stopword. Expects text
// already passed through strip_boilerplate and normalize_equilibrium.
std::vector<std::string> preprocess(std::string_view cleaned_text,
                                    const PreprocessConfig& config);

// ---------------------------------------------------------------------------
// Matrix construction
// ---------------------------------------------------------------------------

IngestResult ingest_records(const std::filesystem::path& path, IngestFormat format);

Vocabulary build_vocabulary(const std::vector<TokenizedDocument>& docs, int min_df);

DtmBuildResult build_dtm(const std::vector<TokenizedDocument>& docs,
                         const Vocabulary& vocab);

// X = [1 | journal dummies (reference = lexicographically smallest) | year].
// `records` supplies journal/year per id; `retained_ids` fixes row order.
PrevalenceDesign build_design(const std::vector<RawDocument>& records,
                              const std::vector<std::string>& retained_ids,
                              YearScaling year_scaling);

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

struct CorpusConfig {
    PreprocessConfig preprocess = default_preprocess_config();
    std::vector<std::string> boilerplate = default_boilerplate_phrases();
    int min_df = 5;
    YearScaling year_scaling = YearScaling::center_scale;
    int threads = 1;
};

struct CorpusArtifacts {
    DocumentTermMatrix dtm;
    Vocabulary vocab;
    PrevalenceDesign design;
    std::vector<std::string> doc_ids;             // aligned with dtm rows
    std::vector<std::string> dropped_empty_ids;   // emptied by preprocessing
};

// clean -> preprocess -> vocabulary -> dtm -> design. Per-document cleaning
// and tokenization run concurrently; everything downstream is a fixed-order
// reduction.
CorpusArtifacts build_corpus(const std::vector<RawDocument>& records,
                             const CorpusConfig& config);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

// Header "D V NNZ", then one "d v count" triple per line, 0-based.
void save_dtm(const DocumentTermMatrix& dtm, const std::filesystem::path& path);
DocumentTermMatrix load_dtm(const std::filesystem::path& path);

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocabulary(const std::filesystem::path& path);

void save_design(const PrevalenceDesign& design, const std::filesystem::path& path);
PrevalenceDesign load_design(const std::filesystem::path& path);

// SHA-256 of the vocabulary's newline-joined terms; stored in model files
// so reports can detect corpus/model mismatches.
std::string vocabulary_hash(const Vocabulary& vocab);

} // namespace stmkit
