// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors
//
// Topic-correlation and prevalence analytics plus the CSV/manifest export.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "stmkit/analysis.hpp"
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

void close_checked(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw FormatError("write failed: " + path.string());
    }
}

std::vector<double> offdiag(const Eigen::MatrixXd& corr,
                            PairConvention convention) {
    const Eigen::Index k = corr.rows();
    std::vector<double> values;
    if (convention == PairConvention::unique) {
        values.reserve(static_cast<std::size_t>(k * (k - 1) / 2));
        for (Eigen::Index i = 0; i < k; ++i) {
            for (Eigen::Index j = i + 1; j < k; ++j) {
                values.push_back(corr(i, j));
            }
        }
    } else {
        values.reserve(static_cast<std::size_t>(k * (k - 1)));
        for (Eigen::Index i = 0; i < k; ++i) {
            for (Eigen::Index j = 0; j < k; ++j) {
                if (i != j) {
                    values.push_back(corr(i, j));
                }
            }
        }
    }
    return values;
}

double median_of_sorted(const std::vector<double>& sorted) {
    const std::size_t n = sorted.size();
    if (n % 2 == 1) {
        return sorted[n / 2];
    }
    return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

// Density plot as a self-contained SVG: one rect per bin.
void write_histogram_svg(const std::vector<HistogramBin>& bins,
                         const std::string& title,
                         const std::filesystem::path& path) {
    constexpr double kWidth = 640.0;
    constexpr double kHeight = 400.0;
    constexpr double kMargin = 40.0;
    double max_density = 0.0;
    for (const auto& bin : bins) {
        max_density = std::max(max_density, bin.density);
    }
    if (max_density <= 0.0) {
        max_density = 1.0;
    }
    const double x_min = bins.front().left;
    const double x_max = bins.back().right;
    const double x_span = x_max > x_min ? x_max - x_min : 1.0;
    const auto x_at = [&](double v) {
        return kMargin + (v - x_min) / x_span * (kWidth - 2 * kMargin);
    };

    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
        << kHeight << "\">\n";
    out << "  <title>" << title << "</title>\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& bin : bins) {
        const double x = x_at(bin.left);
        const double w = x_at(bin.right) - x;
        const double h = bin.density / max_density * (kHeight - 2 * kMargin);
        const double y = kHeight - kMargin - h;
        out << "  <rect x=\"" << format_double(x, 6) << "\" y=\""
            << format_double(y, 6) << "\" width=\"" << format_double(w, 6)
            << "\" height=\"" << format_double(h, 6)
            << "\" fill=\"steelblue\" stroke=\"none\"/>\n";
    }
    out << "  <line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin
        << "\" x2=\"" << kWidth - kMargin << "\" y2=\"" << kHeight - kMargin
        << "\" stroke=\"black\"/>\n";
    out << "</svg>\n";
    close_checked(out, path);
}

void save_histogram_csv(const std::vector<HistogramBin>& bins,
                        const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "bin_left,bin_right,density\n";
    for (const auto& bin : bins) {
        out << format_double(bin.left, 6) << ',' << format_double(bin.right, 6)
            << ',' << format_double(bin.density, 6) << '\n';
    }
    close_checked(out, path);
}

} // namespace

PairConvention pair_convention_from_string(std::string_view name) {
    if (name == "ordered") {
        return PairConvention::ordered;
    }
    if (name == "unique") {
        return PairConvention::unique;
    }
    throw ConfigError("unknown pair convention: " + std::string(name) +
                      " (expected ordered or unique)");
}

std::string to_string(PairConvention convention) {
    return convention == PairConvention::ordered ? "ordered" : "unique";
}

Eigen::MatrixXd topic_correlations(const Eigen::MatrixXd& theta) {
    const Eigen::Index d = theta.rows();
    const Eigen::Index k = theta.cols();
    if (d < 3) {
        throw ValidationError("correlations need at least 3 documents, have " +
                              std::to_string(d));
    }
    const Eigen::RowVectorXd means = theta.colwise().mean();
    const Eigen::MatrixXd centered = theta.rowwise() - means;
    Eigen::VectorXd scatter(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        scatter(j) = centered.col(j).squaredNorm();
        if (scatter(j) <= 0.0) {
            throw NumericalError("topic_" + std::to_string(j + 1) +
                                 " has constant prevalence; correlation "
                                 "undefined");
        }
    }
    Eigen::MatrixXd corr(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        corr(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < k; ++j) {
            const double r = centered.col(i).dot(centered.col(j)) /
                             std::sqrt(scatter(i) * scatter(j));
            const double clamped = std::clamp(r, -1.0, 1.0);
            corr(i, j) = clamped;
            corr(j, i) = clamped;
        }
    }
    return corr;
}

CorrStats correlation_stats(const Eigen::MatrixXd& corr,
                            PairConvention convention) {
    const Eigen::Index k = corr.rows();
    if (k < 2) {
        throw ValidationError("correlation statistics need K >= 2");
    }
    // Selection listings follow the convention, but the statistics are
    // always taken over the unique pairs so both conventions agree.
    (void)convention;
    std::vector<double> values = offdiag(corr, PairConvention::unique);
    std::sort(values.begin(), values.end());

    CorrStats stats;
    stats.min = values.front();
    stats.max = values.back();
    stats.mean = std::accumulate(values.begin(), values.end(), 0.0) /
                 static_cast<double>(values.size());
    stats.median = median_of_sorted(values);
    if (values.size() > 1) {
        double ss = 0.0;
        for (const double v : values) {
            ss += (v - stats.mean) * (v - stats.mean);
        }
        stats.std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return stats;
}

std::vector<TopPair> top_pairs(const Eigen::MatrixXd& corr, int n) {
    const Eigen::Index k = corr.rows();
    const long long total = static_cast<long long>(k) * (k - 1) / 2;
    if (n < 0 || static_cast<long long>(n) > total) {
        throw ConfigError("top_pairs: n = " + std::to_string(n) +
                          " exceeds the " + std::to_string(total) +
                          " unique pairs");
    }
    std::vector<TopPair> pairs;
    pairs.reserve(static_cast<std::size_t>(total));
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i + 1; j < k; ++j) {
            pairs.push_back({static_cast<int>(i) + 1, static_cast<int>(j) + 1,
                             corr(i, j)});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const TopPair& a, const TopPair& b) {
        if (a.r != b.r) {
            return a.r > b.r;
        }
        if (a.topic_i != b.topic_i) {
            return a.topic_i < b.topic_i;
        }
        return a.topic_j < b.topic_j;
    });
    pairs.resize(static_cast<std::size_t>(n));
    return pairs;
}

std::vector<HistogramBin> histogram(const std::vector<double>& values,
                                    double bin_width) {
    if (values.empty()) {
        throw ValidationError("histogram of an empty sample");
    }
    if (!(bin_width > 0.0)) {
        throw ConfigError("bin width must be positive");
    }
    long long lo = std::numeric_limits<long long>::max();
    long long hi = std::numeric_limits<long long>::min();
    for (const double v : values) {
        if (!std::isfinite(v)) {
            throw NumericalError("histogram: non-finite value");
        }
        const long long idx = static_cast<long long>(std::floor(v / bin_width));
        lo = std::min(lo, idx);
        hi = std::max(hi, idx);
    }
    const long long span = hi - lo + 1;
    if (span > 10'000'000) {
        throw ConfigError("bin width " + format_double(bin_width) +
                          " produces " + std::to_string(span) + " bins");
    }
    std::vector<long long> counts(static_cast<std::size_t>(span), 0);
    for (const double v : values) {
        const long long idx = static_cast<long long>(std::floor(v / bin_width));
        ++counts[static_cast<std::size_t>(idx - lo)];
    }
    std::vector<HistogramBin> bins(static_cast<std::size_t>(span));
    const double n = static_cast<double>(values.size());
    for (long long b = 0; b < span; ++b) {
        auto& bin = bins[static_cast<std::size_t>(b)];
        bin.left = static_cast<double>(lo + b) * bin_width;
        bin.right = static_cast<double>(lo + b + 1) * bin_width;
        bin.density = static_cast<double>(counts[static_cast<std::size_t>(b)]) /
                      (n * bin_width);
    }
    return bins;
}

CorrelationReport correlation_report(const Eigen::MatrixXd& theta,
                                     PairConvention convention, int top_n,
                                     double bin_width) {
    CorrelationReport report;
    report.k = static_cast<int>(theta.cols());
    report.corr = topic_correlations(theta);
    report.convention = convention;
    report.offdiag_values = offdiag(report.corr, convention);
    report.stats = correlation_stats(report.corr, convention);
    report.top_pairs = top_pairs(report.corr, top_n);
    report.histogram = histogram(report.offdiag_values, bin_width);
    return report;
}

PrevalenceReport prevalence_stats(const Eigen::MatrixXd& theta,
                                  double bin_width) {
    if (theta.size() == 0) {
        throw ValidationError("prevalence statistics of an empty matrix");
    }
    PrevalenceReport report;
    report.n_values = static_cast<long long>(theta.rows()) * theta.cols();
    report.theoretical_mean = 1.0 / static_cast<double>(theta.cols());
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(report.n_values));
    long long below = 0;
    double total = 0.0;
    for (Eigen::Index i = 0; i < theta.rows(); ++i) {
        for (Eigen::Index j = 0; j < theta.cols(); ++j) {
            const double v = theta(i, j);
            values.push_back(v);
            total += v;
            if (v < report.theoretical_mean) {
                ++below;
            }
        }
    }
    report.mean = total / static_cast<double>(report.n_values);
    report.share_below_theoretical =
        static_cast<double>(below) / static_cast<double>(report.n_values);
    report.histogram = histogram(values, bin_width);
    return report;
}

Eigen::MatrixXd sigma_correlations(const Eigen::MatrixXd& sigma) {
    const Eigen::Index m = sigma.rows();
    if (m < 1 || sigma.cols() != m) {
        throw ValidationError("sigma must be square and non-empty");
    }
    Eigen::MatrixXd corr(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (sigma(i, i) <= 0.0) {
            throw NumericalError("sigma has a non-positive variance at " +
                                 std::to_string(i + 1));
        }
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        corr(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < m; ++j) {
            const double r =
                sigma(i, j) / std::sqrt(sigma(i, i) * sigma(j, j));
            corr(i, j) = std::clamp(r, -1.0, 1.0);
            corr(j, i) = corr(i, j);
        }
    }
    return corr;
}

MultiKComparison multi_k_correlation_comparison(
    const std::vector<std::pair<int, Eigen::MatrixXd>>& thetas_by_k,
    double bin_width) {
    if (thetas_by_k.size() < 2) {
        throw ValidationError("comparison needs at least 2 fits");
    }
    if (!(bin_width > 0.0)) {
        throw ConfigError("bin width must be positive");
    }

    std::vector<std::vector<double>> per_series;
    long long lo = std::numeric_limits<long long>::max();
    long long hi = std::numeric_limits<long long>::min();
    MultiKComparison comparison;
    for (const auto& [k, theta] : thetas_by_k) {
        const Eigen::MatrixXd corr = topic_correlations(theta);
        std::vector<double> values = offdiag(corr, PairConvention::unique);
        for (const double v : values) {
            const long long idx =
                static_cast<long long>(std::floor(v / bin_width));
            lo = std::min(lo, idx);
            hi = std::max(hi, idx);
        }
        MultiKSeries series;
        series.k = k;
        series.mean_offdiag =
            std::accumulate(values.begin(), values.end(), 0.0) /
            static_cast<double>(values.size());
        comparison.series.push_back(std::move(series));
        per_series.push_back(std::move(values));
    }

    const long long span = hi - lo + 1;
    if (span > 10'000'000) {
        throw ConfigError("bin width " + format_double(bin_width) +
                          " produces " + std::to_string(span) + " bins");
    }
    comparison.bin_left.resize(static_cast<std::size_t>(span));
    comparison.bin_right.resize(static_cast<std::size_t>(span));
    for (long long b = 0; b < span; ++b) {
        comparison.bin_left[static_cast<std::size_t>(b)] =
            static_cast<double>(lo + b) * bin_width;
        comparison.bin_right[static_cast<std::size_t>(b)] =
            static_cast<double>(lo + b + 1) * bin_width;
    }
    for (std::size_t s = 0; s < per_series.size(); ++s) {
        auto& series = comparison.series[s];
        series.densities.assign(static_cast<std::size_t>(span), 0.0);
        const double n = static_cast<double>(per_series[s].size());
        for (const double v : per_series[s]) {
            const long long idx =
                static_cast<long long>(std::floor(v / bin_width));
            series.densities[static_cast<std::size_t>(idx - lo)] +=
                1.0 / (n * bin_width);
        }
    }
    return comparison;
}

void save_multi_k_csv(const MultiKComparison& comparison,
                      const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "k,mean_offdiag,bin_left,bin_right,density\n";
    for (const auto& series : comparison.series) {
        for (std::size_t b = 0; b < comparison.bin_left.size(); ++b) {
            out << series.k << ',' << format_double(series.mean_offdiag, 6)
                << ',' << format_double(comparison.bin_left[b], 6) << ','
                << format_double(comparison.bin_right[b], 6) << ','
                << format_double(series.densities[b], 6) << '\n';
        }
    }
    close_checked(out, path);
}

std::map<std::string, std::string> export_report(
    const Eigen::MatrixXd& theta, const TopicLabels& labels,
    const CorrelationReport& corr_report, const PrevalenceReport& prev_report,
    const std::filesystem::path& out_dir, const ExportOptions& options) {
    std::filesystem::create_directories(out_dir);

    save_theta_csv(theta, out_dir / "theta.csv");

    {
        const auto path = out_dir / "correlations.csv";
        auto out = open_out(path);
        for (Eigen::Index j = 0; j < corr_report.corr.cols(); ++j) {
            if (j > 0) {
                out << ',';
            }
            out << "topic_" << (j + 1);
        }
        out << '\n';
        for (Eigen::Index i = 0; i < corr_report.corr.rows(); ++i) {
            for (Eigen::Index j = 0; j < corr_report.corr.cols(); ++j) {
                if (j > 0) {
                    out << ',';
                }
                out << format_double(corr_report.corr(i, j), 6);
            }
            out << '\n';
        }
        close_checked(out, path);
    }

    {
        const auto path = out_dir / "corr_stats.csv";
        auto out = open_out(path);
        out << "min,mean,median,max,std_dev\n";
        out << format_double(corr_report.stats.min, 6) << ','
            << format_double(corr_report.stats.mean, 6) << ','
            << format_double(corr_report.stats.median, 6) << ','
            << format_double(corr_report.stats.max, 6) << ','
            << format_double(corr_report.stats.std_dev, 6) << '\n';
        close_checked(out, path);
    }

    {
        const auto path = out_dir / "top_pairs.csv";
        auto out = open_out(path);
        out << "topic_i,topic_j,r\n";
        for (const auto& pair : corr_report.top_pairs) {
            out << pair.topic_i << ',' << pair.topic_j << ','
                << format_fixed(pair.r, 4) << '\n';
        }
        close_checked(out, path);
    }

    save_histogram_csv(prev_report.histogram, out_dir / "prevalence_hist.csv");
    save_labels_text(labels, out_dir / "labels.txt");

    if (options.svg) {
        write_histogram_svg(corr_report.histogram, "Topic correlation density",
                            out_dir / "correlations_hist.svg");
        write_histogram_svg(prev_report.histogram, "Topic prevalence density",
                            out_dir / "prevalence_hist.svg");
    }

    std::vector<std::string> manifest_files = {
        "theta.csv",      "correlations.csv",    "corr_stats.csv",
        "top_pairs.csv",  "prevalence_hist.csv", "labels.txt",
    };
    if (std::filesystem::exists(out_dir / "sweep.csv")) {
        manifest_files.push_back("sweep.csv");
    }

    std::map<std::string, std::string> manifest;
    for (const auto& name : manifest_files) {
        manifest[name] = sha256_hex_file(out_dir / name);
    }

    nlohmann::json doc(manifest);
    const auto manifest_path = out_dir / "manifest.json";
    auto out = open_out(manifest_path);
    out << doc.dump(2) << '\n';
    close_checked(out, manifest_path);
    return manifest;
}

} // namespace stmkit
