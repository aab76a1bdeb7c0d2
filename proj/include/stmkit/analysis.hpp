// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors
#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "stmkit/diagnostics.hpp"

namespace stmkit {

// ---------------------------------------------------------------------------
// Correlation analytics
// ---------------------------------------------------------------------------

// How off-diagonal entries are enumerated: every (i, j), i != j, or each
// unordered pair once. Descriptive statistics match under both (the
// symmetric duplicates carry no information and are dropped before the
// n-1 variance), so the choice only affects listings.
enum class PairConvention { ordered, unique };

PairConvention pair_convention_from_string(std::string_view name);
std::string to_string(PairConvention convention);

struct CorrStats {
    double min = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double max = 0.0;
    double std_dev = 0.0;
};

struct TopPair {
    int topic_i = 0; // 1-based, topic_i < topic_j
    int topic_j = 0;
    double r = 0.0;
};

struct HistogramBin {
    double left = 0.0;
    double right = 0.0;
    double density = 0.0;
};

struct CorrelationReport {
    int k = 0;
    Eigen::MatrixXd corr; // K x K, symmetric, unit diagonal
    PairConvention convention = PairConvention::unique;
    std::vector<double> offdiag_values; // per convention, row-major
    CorrStats stats;
    std::vector<TopPair> top_pairs;
    std::vector<HistogramBin> histogram;
};

struct PrevalenceReport {
    long long n_values = 0; // D * K
    double mean = 0.0;      // equals 1/K up to rounding
    double theoretical_mean = 0.0;
    double share_below_theoretical = 0.0;
    std::vector<HistogramBin> histogram;
};

// Pearson correlation of theta columns across documents; symmetrized with
// a unit diagonal. A constant column is degenerate and reported by topic.
Eigen::MatrixXd topic_correlations(const Eigen::MatrixXd& theta);

// min/mean/median/max/std_dev over the off-diagonal; median of an even
// count is the midpoint, std_dev uses n-1 over the unique pairs.
CorrStats correlation_stats(const Eigen::MatrixXd& corr, PairConvention convention);

// The n strongest unique pairs, r descending, ties by (i, j) ascending.
std::vector<TopPair> top_pairs(const Eigen::MatrixXd& corr, int n = 10);

// Left-closed bins aligned to multiples of bin_width spanning the data
// (interior empty bins included); density = count / (n * bin_width).
std::vector<HistogramBin> histogram(const std::vector<double>& values,
                                    double bin_width);

CorrelationReport correlation_report(const Eigen::MatrixXd& theta,
                                     PairConvention convention = PairConvention::unique,
                                     int top_n = 10, double bin_width = 0.01);

// Flattens theta to D*K prevalence values; mean, share strictly below the
// uniform benchmark 1/K, and the density histogram.
PrevalenceReport prevalence_stats(const Eigen::MatrixXd& theta,
                                  double bin_width = 0.005);

// Optional sensitivity mode: correlation matrix derived from the fitted
// covariance of eta instead of the theta columns (cov-to-corr on sigma,
// augmented with the pinned K-th coordinate left out).
Eigen::MatrixXd sigma_correlations(const Eigen::MatrixXd& sigma);

// ---------------------------------------------------------------------------
// Multi-K comparison (overlayed correlation densities)
// ---------------------------------------------------------------------------

struct MultiKSeries {
    int k = 0;
    double mean_offdiag = 0.0;
    std::vector<double> densities; // aligned with the shared grid
};

struct MultiKComparison {
    std::vector<double> bin_left; // shared grid
    std::vector<double> bin_right;
    std::vector<MultiKSeries> series;
};

// Per-K mean off-diagonal correlation plus density series on one shared
// bin grid so the curves can be overlaid.
MultiKComparison multi_k_correlation_comparison(
    const std::vector<std::pair<int, Eigen::MatrixXd>>& thetas_by_k,
    double bin_width = 0.01);

void save_multi_k_csv(const MultiKComparison& comparison,
                      const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Report export
// ---------------------------------------------------------------------------

struct ExportOptions {
    bool svg = false; // also draw minimal density plots
};

// Writes theta.csv, correlations.csv, corr_stats.csv, top_pairs.csv,
// prevalence_hist.csv and labels.txt into out_dir, hashes them together
// with a pre-existing sweep.csv (if any) into manifest.json, and returns
// the filename -> SHA-256 map.
std::map<std::string, std::string> export_report(
    const Eigen::MatrixXd& theta, const TopicLabels& labels,
    const CorrelationReport& corr_report, const PrevalenceReport& prev_report,
    const std::filesystem::path& out_dir, const ExportOptions& options = {});

} // namespace stmkit
