// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "stmkit/corpus.hpp"
#include "stmkit/inference.hpp"

namespace stmkit {

// ---------------------------------------------------------------------------
// Per-fit diagnostics
// ---------------------------------------------------------------------------

struct TopicDiagnostics {
    int k = 0;
    std::vector<double> coherence;   // per topic, always <= 0
    std::vector<double> exclusivity; // per topic FREX-sum score
    double mean_coherence = 0.0;     // unweighted mean across topics
    double mean_exclusivity = 0.0;
    std::vector<std::vector<std::string>> top_prob_words; // scoring lists
    std::vector<std::vector<std::string>> top_frex_words;
};

// Indices of the m largest scores; ties resolve to the smaller index
// (vocabulary order, i.e. lexicographic for a built vocabulary).
std::vector<int> top_terms(const Eigen::VectorXd& scores, int m);

// C_k = sum_{m=2..M} sum_{l<m} log((D(v_m,v_l) + 1) / D(v_l)) where D(v) is
// the document frequency and D(v,v') the co-document frequency. One entry
// per topic; `top_terms_per_topic` holds each topic's M highest-probability
// term indices.
std::vector<double> semantic_coherence(
    const std::vector<std::vector<int>>& top_terms_per_topic,
    const DocumentTermMatrix& dtm);

// FREX_{k,v} = 1 / (w / F_ex(ex_{k,v}) + (1-w) / F_freq(beta_{k,v})) with
// ex_{k,v} = beta_{k,v} / sum_j beta_{j,v} and within-topic empirical CDFs
// (proportion <= x). Per-topic score = sum of the M largest FREX values.
std::vector<double> exclusivity(const Eigen::MatrixXd& beta, double weight = 0.7,
                                int m = 10);

// Full FREX matrix (same shape as beta); exposed for label selection.
Eigen::MatrixXd frex_scores(const Eigen::MatrixXd& beta, double weight);

struct TopicLabels {
    std::vector<std::vector<std::string>> prob_words;
    std::vector<std::vector<std::string>> frex_words;
};

// M highest-probability and M highest-FREX terms per topic (label weight
// default 0.5); ties lexicographic.
TopicLabels label_topics(const Eigen::MatrixXd& beta, const Vocabulary& vocab,
                         int m = 7, double frex_weight = 0.5);

// Two lines per topic:
//   Topic <n>  Highest Prob: t1, ..., tM
//     FREX: t1, ..., tM
std::string render_labels_text(const TopicLabels& labels);
void save_labels_text(const TopicLabels& labels, const std::filesystem::path& path);

// Long-form table: topic, rank, prob_word, frex_word.
void save_labels_csv(const TopicLabels& labels, const std::filesystem::path& path);

// Coherence + exclusivity (M = score_m) for one fitted model.
TopicDiagnostics diagnose(const Eigen::MatrixXd& beta, const Vocabulary& vocab,
                          const DocumentTermMatrix& dtm, int score_m = 10,
                          double exclusivity_weight = 0.7);

// ---------------------------------------------------------------------------
// K sweep
// ---------------------------------------------------------------------------

struct SweepConfig {
    FitConfig fit; // fit.seed is the sweep base seed
    std::filesystem::path checkpoint_dir; // empty disables checkpointing
    int score_m = 10;
    double exclusivity_weight = 0.7;
    int workers = 1; // concurrent K fits
};

struct SweepEntry {
    int k = 0;
    double se = 0.0;   // mean semantic coherence
    double ex = 0.0;   // mean exclusivity
    double elbo = 0.0; // final bound of the fit
    std::uint64_t seed = 0;
    bool fit_ok = false;
    std::string error; // populated when fit_ok is false
};

struct SweepResult {
    std::vector<SweepEntry> entries; // ascending K
    std::vector<int> candidates;
    int k_star = 0; // user-confirmed selection; 0 while unset
};

// Seed for one K of a sweep, derived from the base seed so runs of
// different K never share generator streams.
std::uint64_t sweep_seed(std::uint64_t base_seed, int k);

// Fits each K (ascending, deduplicated), scores it, and checkpoints
// completed entries as k_<K>.json so an interrupted sweep resumes where it
// stopped. A failing fit is recorded on its entry without aborting.
SweepResult k_sweep(const DocumentTermMatrix& dtm, const Eigen::MatrixXd& X,
                    std::vector<int> k_values, const SweepConfig& config);

// Flags K whose coherence increase over the previous entry is positive and
// at least the 75th percentile of all positive increases.
std::vector<int> candidate_ks(const std::vector<SweepEntry>& entries);

// Figure-friendly affine rescaling: se_hat = se/10 + 20, ex_hat = (ex-8)*5.
std::pair<double, double> plot_transform(double se, double ex);

// Linear-interpolation (type 7) percentile of a sample; p in [0, 1].
double percentile(std::vector<double> values, double p);

// Sweep summary CSV: k, se, ex, se_hat, ex_hat, candidate.
void save_sweep_csv(const SweepResult& result, const std::filesystem::path& path);

std::filesystem::path sweep_checkpoint_path(const std::filesystem::path& dir, int k);

} // namespace stmkit
