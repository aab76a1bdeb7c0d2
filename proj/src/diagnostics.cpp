// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors
//
// Semantic coherence, FREX exclusivity, label tables and the K sweep used
// to shortlist topic counts.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "stmkit/csv.hpp"
#include "stmkit/diagnostics.hpp"
#include "stmkit/errors.hpp"
#include "stmkit/numfmt.hpp"
#include "stmkit/parallel.hpp"
#include "stmkit/rng.hpp"

namespace stmkit {

namespace {

constexpr std::uint64_t kStreamSweep = 2;

// Sorted postings (document indices) per term.
std::vector<std::vector<int>> build_postings(const DocumentTermMatrix& dtm) {
    std::vector<std::vector<int>> postings(static_cast<std::size_t>(dtm.n_terms));
    for (int d = 0; d < dtm.n_docs(); ++d) {
        for (const auto& [term, count] : dtm.rows[static_cast<std::size_t>(d)]) {
            postings[static_cast<std::size_t>(term)].push_back(d);
        }
    }
    return postings;
}

std::size_t intersection_size(const std::vector<int>& a, const std::vector<int>& b) {
    std::size_t n = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++n;
            ++ia;
            ++ib;
        }
    }
    return n;
}

// Empirical CDF values (proportion of entries <= x) for each entry of `values`.
Eigen::VectorXd ecdf(const Eigen::VectorXd& values) {
    std::vector<double> sorted(values.data(), values.data() + values.size());
    std::sort(sorted.begin(), sorted.end());
    Eigen::VectorXd out(values.size());
    const double n = static_cast<double>(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const auto upper =
            std::upper_bound(sorted.begin(), sorted.end(), values(i));
        out(i) = static_cast<double>(upper - sorted.begin()) / n;
    }
    return out;
}

std::string join_terms(const std::vector<std::string>& terms) {
    std::string out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += terms[i];
    }
    return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot open file for writing: " + path.string());
    }
    return out;
}

} // namespace

std::vector<int> top_terms(const Eigen::VectorXd& scores, int m) {
    if (m < 1 || m > scores.size()) {
        throw ConfigError("top_terms: m = " + std::to_string(m) +
                          " outside [1, " + std::to_string(scores.size()) + "]");
    }
    std::vector<int> order(static_cast<std::size_t>(scores.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return scores(a) != scores(b) ? scores(a) > scores(b) : a < b;
    });
    order.resize(static_cast<std::size_t>(m));
    return order;
}

std::vector<double> semantic_coherence(
    const std::vector<std::vector<int>>& top_terms_per_topic,
    const DocumentTermMatrix& dtm) {
    const auto postings = build_postings(dtm);
    std::vector<double> coherence;
    coherence.reserve(top_terms_per_topic.size());
    for (const auto& words : top_terms_per_topic) {
        double c = 0.0;
        for (std::size_t m = 1; m < words.size(); ++m) {
            for (std::size_t l = 0; l < m; ++l) {
                const auto& later = postings[static_cast<std::size_t>(words[m])];
                const auto& earlier = postings[static_cast<std::size_t>(words[l])];
                const double df = static_cast<double>(earlier.size());
                if (df == 0.0) {
                    throw ValidationError(
                        "semantic_coherence: top word with zero document "
                        "frequency; word lists must come from this matrix");
                }
                const double co =
                    static_cast<double>(intersection_size(later, earlier));
                c += std::log((co + 1.0) / df);
            }
        }
        coherence.push_back(c);
    }
    return coherence;
}

Eigen::MatrixXd frex_scores(const Eigen::MatrixXd& beta, double weight) {
    if (weight < 0.0 || weight > 1.0) {
        throw ConfigError("FREX weight must lie in [0, 1]");
    }
    const Eigen::VectorXd column_totals = beta.colwise().sum().transpose();
    Eigen::MatrixXd frex(beta.rows(), beta.cols());
    for (Eigen::Index k = 0; k < beta.rows(); ++k) {
        const Eigen::VectorXd ex =
            beta.row(k).transpose().cwiseQuotient(column_totals);
        const Eigen::VectorXd f_ex = ecdf(ex);
        const Eigen::VectorXd f_freq = ecdf(beta.row(k).transpose());
        for (Eigen::Index v = 0; v < beta.cols(); ++v) {
            frex(k, v) = 1.0 / (weight / f_ex(v) + (1.0 - weight) / f_freq(v));
        }
    }
    return frex;
}

std::vector<double> exclusivity(const Eigen::MatrixXd& beta, double weight, int m) {
    const Eigen::MatrixXd frex = frex_scores(beta, weight);
    std::vector<double> scores;
    scores.reserve(static_cast<std::size_t>(beta.rows()));
    for (Eigen::Index k = 0; k < beta.rows(); ++k) {
        const auto top = top_terms(frex.row(k).transpose(), m);
        double total = 0.0;
        for (const int v : top) {
            total += frex(k, v);
        }
        scores.push_back(total);
    }
    return scores;
}

TopicLabels label_topics(const Eigen::MatrixXd& beta, const Vocabulary& vocab,
                         int m, double frex_weight) {
    if (m > vocab.size()) {
        throw ConfigError("label size " + std::to_string(m) +
                          " exceeds vocabulary size " +
                          std::to_string(vocab.size()));
    }
    if (beta.cols() != vocab.size()) {
        throw ValidationError("label_topics: beta columns do not match vocabulary");
    }
    const Eigen::MatrixXd frex = frex_scores(beta, frex_weight);
    TopicLabels labels;
    for (Eigen::Index k = 0; k < beta.rows(); ++k) {
        std::vector<std::string> prob;
        std::vector<std::string> frex_words;
        for (const int v : top_terms(beta.row(k).transpose(), m)) {
            prob.push_back(vocab.terms[static_cast<std::size_t>(v)]);
        }
        for (const int v : top_terms(frex.row(k).transpose(), m)) {
            frex_words.push_back(vocab.terms[static_cast<std::size_t>(v)]);
        }
        labels.prob_words.push_back(std::move(prob));
        labels.frex_words.push_back(std::move(frex_words));
    }
    return labels;
}

std::string render_labels_text(const TopicLabels& labels) {
    std::string out;
    for (std::size_t k = 0; k < labels.prob_words.size(); ++k) {
        out += "Topic " + std::to_string(k + 1) + "  Highest Prob: " +
               join_terms(labels.prob_words[k]) + "\n";
        out += "  FREX: " + join_terms(labels.frex_words[k]) + "\n";
    }
    return out;
}

void save_labels_text(const TopicLabels& labels,
                      const std::filesystem::path& path) {
    auto out = open_out(path);
    out << render_labels_text(labels);
    if (!out) {
        throw FormatError("write failed: " + path.string());
    }
}

void save_labels_csv(const TopicLabels& labels,
                     const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "topic,rank,prob_word,frex_word\n";
    for (std::size_t k = 0; k < labels.prob_words.size(); ++k) {
        for (std::size_t r = 0; r < labels.prob_words[k].size(); ++r) {
            out << (k + 1) << ',' << (r + 1) << ','
                << csv_escape(labels.prob_words[k][r]) << ','
                << csv_escape(labels.frex_words[k][r]) << '\n';
        }
    }
    if (!out) {
        throw FormatError("write failed: " + path.string());
    }
}

TopicDiagnostics diagnose(const Eigen::MatrixXd& beta, const Vocabulary& vocab,
                          const DocumentTermMatrix& dtm, int score_m,
                          double exclusivity_weight) {
    TopicDiagnostics diag;
    diag.k = static_cast<int>(beta.rows());

    std::vector<std::vector<int>> prob_terms;
    prob_terms.reserve(static_cast<std::size_t>(beta.rows()));
    for (Eigen::Index k = 0; k < beta.rows(); ++k) {
        prob_terms.push_back(top_terms(beta.row(k).transpose(), score_m));
    }
    diag.coherence = semantic_coherence(prob_terms, dtm);
    diag.exclusivity = exclusivity(beta, exclusivity_weight, score_m);

    const Eigen::MatrixXd frex = frex_scores(beta, exclusivity_weight);
    for (Eigen::Index k = 0; k < beta.rows(); ++k) {
        std::vector<std::string> prob;
        std::vector<std::string> frex_words;
        for (const int v : prob_terms[static_cast<std::size_t>(k)]) {
            prob.push_back(vocab.terms[static_cast<std::size_t>(v)]);
        }
        for (const int v : top_terms(frex.row(k).transpose(), score_m)) {
            frex_words.push_back(vocab.terms[static_cast<std::size_t>(v)]);
        }
        diag.top_prob_words.push_back(std::move(prob));
        diag.top_frex_words.push_back(std::move(frex_words));
    }

    diag.mean_coherence =
        std::accumulate(diag.coherence.begin(), diag.coherence.end(), 0.0) /
        static_cast<double>(diag.coherence.size());
    diag.mean_exclusivity =
        std::accumulate(diag.exclusivity.begin(), diag.exclusivity.end(), 0.0) /
        static_cast<double>(diag.exclusivity.size());
    return diag;
}

// ---------------------------------------------------------------------------
// K sweep
// ---------------------------------------------------------------------------

std::uint64_t sweep_seed(std::uint64_t base_seed, int k) {
    return CounterRng::derive_key(base_seed, kStreamSweep,
                                  static_cast<std::uint64_t>(k));
}

std::filesystem::path sweep_checkpoint_path(const std::filesystem::path& dir,
                                            int k) {
    return dir / ("k_" + std::to_string(k) + ".json");
}

namespace {

bool load_checkpoint(const std::filesystem::path& path, std::uint64_t expected_seed,
                     SweepEntry& entry) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return false;
    }
    nlohmann::json doc;
    try {
        in >> doc;
        entry.k = doc.at("k").get<int>();
        entry.se = doc.at("se").get<double>();
        entry.ex = doc.at("ex").get<double>();
        entry.elbo = doc.at("elbo").get<double>();
        entry.seed = doc.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception&) {
        return false; // corrupt or partial checkpoint: refit
    }
    if (entry.seed != expected_seed) {
        return false; // stale checkpoint from another base seed
    }
    entry.fit_ok = true;
    return true;
}

void save_checkpoint(const std::filesystem::path& path, const SweepEntry& entry) {
    nlohmann::json doc;
    doc["k"] = entry.k;
    doc["se"] = entry.se;
    doc["ex"] = entry.ex;
    doc["elbo"] = entry.elbo;
    doc["seed"] = entry.seed;
    // Write-then-rename so an interrupt never leaves a truncated file.
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw FormatError("cannot open checkpoint for writing: " +
                              tmp.string());
        }
        out << doc.dump(2) << '\n';
        if (!out) {
            throw FormatError("checkpoint write failed: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace

SweepResult k_sweep(const DocumentTermMatrix& dtm, const Eigen::MatrixXd& X,
                    std::vector<int> k_values, const SweepConfig& config) {
    if (k_values.empty()) {
        throw ConfigError("sweep needs at least one K");
    }
    std::sort(k_values.begin(), k_values.end());
    k_values.erase(std::unique(k_values.begin(), k_values.end()), k_values.end());
    for (const int k : k_values) {
        if (k < 2) {
            throw ConfigError("sweep K values must be >= 2, got " +
                              std::to_string(k));
        }
    }
    const bool checkpointing = !config.checkpoint_dir.empty();
    if (checkpointing) {
        std::filesystem::create_directories(config.checkpoint_dir);
    }

    SweepResult result;
    result.entries.assign(k_values.size(), SweepEntry{});
    const int n = static_cast<int>(k_values.size());
    parallel_blocks(
        n, config.workers,
        [&](int, int lo, int hi) {
            for (int i = lo; i < hi; ++i) {
                const int k = k_values[static_cast<std::size_t>(i)];
                SweepEntry& entry = result.entries[static_cast<std::size_t>(i)];
                entry.k = k;
                entry.seed = sweep_seed(config.fit.seed, k);
                const auto checkpoint =
                    checkpointing ? sweep_checkpoint_path(config.checkpoint_dir, k)
                                  : std::filesystem::path{};
                if (checkpointing && load_checkpoint(checkpoint, entry.seed, entry)) {
                    continue;
                }
                try {
                    FitConfig fit_config = config.fit;
                    fit_config.seed = entry.seed;
                    const FitResult fitted = fit(dtm, X, k, fit_config);
                    Vocabulary dummy_vocab;
                    dummy_vocab.terms.assign(
                        static_cast<std::size_t>(dtm.n_terms), {});
                    // Scoring needs term indices only; label text is not
                    // produced here, so placeholder terms are fine.
                    std::vector<std::vector<int>> prob_terms;
                    for (Eigen::Index t = 0; t < fitted.params.beta.rows(); ++t) {
                        prob_terms.push_back(top_terms(
                            fitted.params.beta.row(t).transpose(), config.score_m));
                    }
                    const auto coherence = semantic_coherence(prob_terms, dtm);
                    const auto scores = exclusivity(
                        fitted.params.beta, config.exclusivity_weight,
                        config.score_m);
                    entry.se = std::accumulate(coherence.begin(), coherence.end(),
                                               0.0) /
                               static_cast<double>(coherence.size());
                    entry.ex = std::accumulate(scores.begin(), scores.end(), 0.0) /
                               static_cast<double>(scores.size());
                    entry.elbo = fitted.elbo_trace.back();
                    entry.fit_ok = true;
                    if (checkpointing) {
                        save_checkpoint(checkpoint, entry);
                    }
                } catch (const Error& e) {
                    entry.fit_ok = false;
                    entry.error = e.what();
                }
            }
        },
        /*block_size=*/1);

    // Spike detection needs >= 3 comparable entries; shorter sweeps simply
    // propose nothing.
    const auto ok_entries = std::count_if(
        result.entries.begin(), result.entries.end(),
        [](const SweepEntry& entry) { return entry.fit_ok; });
    if (ok_entries >= 3) {
        result.candidates = candidate_ks(result.entries);
    }
    return result;
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) {
        throw ValidationError("percentile of an empty sample");
    }
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) {
        return values.back();
    }
    const double frac = h - std::floor(h);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

std::vector<int> candidate_ks(const std::vector<SweepEntry>& entries) {
    std::vector<const SweepEntry*> ok;
    for (const auto& entry : entries) {
        if (entry.fit_ok) {
            ok.push_back(&entry);
        }
    }
    if (ok.size() < 3) {
        throw ValidationError("candidate detection needs at least 3 sweep entries");
    }

    std::vector<double> deltas(ok.size(), 0.0);
    std::vector<double> positives;
    for (std::size_t i = 1; i < ok.size(); ++i) {
        deltas[i] = ok[i]->se - ok[i - 1]->se;
        if (deltas[i] > 0.0) {
            positives.push_back(deltas[i]);
        }
    }
    if (positives.empty()) {
        return {};
    }
    const double bar = percentile(positives, 0.75);
    std::vector<int> candidates;
    for (std::size_t i = 1; i < ok.size(); ++i) {
        if (deltas[i] > 0.0 && deltas[i] >= bar) {
            candidates.push_back(ok[i]->k);
        }
    }
    return candidates;
}

std::pair<double, double> plot_transform(double se, double ex) {
    return {se / 10.0 + 20.0, (ex - 8.0) * 5.0};
}

void save_sweep_csv(const SweepResult& result, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "k,se,ex,se_hat,ex_hat,candidate\n";
    for (const auto& entry : result.entries) {
        const bool candidate =
            std::find(result.candidates.begin(), result.candidates.end(),
                      entry.k) != result.candidates.end();
        out << entry.k << ',';
        if (entry.fit_ok) {
            const auto [se_hat, ex_hat] = plot_transform(entry.se, entry.ex);
            out << format_double(entry.se, 6) << ',' << format_double(entry.ex, 6)
                << ',' << format_double(se_hat, 6) << ','
                << format_double(ex_hat, 6);
        } else {
            out << ",,,";
        }
        out << ',' << (candidate ? "true" : "false") << '\n';
    }
    if (!out) {
        throw FormatError("write failed: " + path.string());
    }
}

} // namespace stmkit
