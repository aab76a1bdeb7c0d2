// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors
//
// stmkit command line: ingest -> fit/sweep -> report. Every subcommand
// accepts --config FILE (JSON); command-line flags override file values and
// the effective configuration is echoed next to the outputs.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stmkit/analysis.hpp"
#include "stmkit/corpus.hpp"
#include "stmkit/diagnostics.hpp"
#include "stmkit/errors.hpp"
#include "stmkit/inference.hpp"
#include "stmkit/numfmt.hpp"
#include "stmkit/parallel.hpp"
#include "stmkit/sha256.hpp"

namespace {

using stmkit::ConfigError;
using stmkit::FormatError;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitMismatch = 4;

struct RunConfig {
    // input
    std::string input;
    std::string format = "jsonl";
    std::string out = "out";
    // preprocessing
    std::string stopwords;   // path; empty -> bundled list
    std::string boilerplate; // path; empty -> bundled phrases
    int min_df = 5;
    std::string year_scaling = "center_scale";
    // model
    int k = 0;
    std::string sweep; // LO:HI:STEP
    std::optional<std::uint64_t> seed;
    double tol = 1e-5;
    int max_iters = 500;
    double ridge = 1e-6;
    std::string init = "seeded_random";
    // analysis
    double corr_bin_width = 0.01;
    double prev_bin_width = 0.005;
    int top_pairs = 10;
    std::string pair_convention = "unique";
    bool svg = false;
    bool sigma_corr = false;
    // run control
    int threads = 0; // 0 -> environment/default
    int sweep_workers = 1;
    int k_star = 0;
    bool verbose = false;
};

void apply_config_file(RunConfig& config, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open config file: " + path);
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path + ": invalid JSON: " + e.what());
    }
    if (!doc.is_object()) {
        throw FormatError(path + ": config must be a JSON object");
    }
    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "input") config.input = value.get<std::string>();
            else if (key == "format") config.format = value.get<std::string>();
            else if (key == "out") config.out = value.get<std::string>();
            else if (key == "stopwords") config.stopwords = value.get<std::string>();
            else if (key == "boilerplate") config.boilerplate = value.get<std::string>();
            else if (key == "min_df") config.min_df = value.get<int>();
            else if (key == "year_scaling") config.year_scaling = value.get<std::string>();
            else if (key == "k") config.k = value.get<int>();
            else if (key == "sweep") config.sweep = value.get<std::string>();
            else if (key == "seed") config.seed = value.get<std::uint64_t>();
            else if (key == "tol") config.tol = value.get<double>();
            else if (key == "max_iters") config.max_iters = value.get<int>();
            else if (key == "ridge") config.ridge = value.get<double>();
            else if (key == "init") config.init = value.get<std::string>();
            else if (key == "corr_bin_width") config.corr_bin_width = value.get<double>();
            else if (key == "prev_bin_width") config.prev_bin_width = value.get<double>();
            else if (key == "top_pairs") config.top_pairs = value.get<int>();
            else if (key == "pair_convention") config.pair_convention = value.get<std::string>();
            else if (key == "svg") config.svg = value.get<bool>();
            else if (key == "sigma_corr") config.sigma_corr = value.get<bool>();
            else if (key == "threads") config.threads = value.get<int>();
            else if (key == "sweep_workers") config.sweep_workers = value.get<int>();
            else if (key == "k_star") config.k_star = value.get<int>();
            else if (key == "verbose") config.verbose = value.get<bool>();
            else throw ConfigError(path + ": unknown config key '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(path + ": bad value for '" + key + "': " + e.what());
        }
    }
}

int resolve_threads(const RunConfig& config) {
    if (config.threads > 0) {
        return config.threads;
    }
    if (const char* env = std::getenv("STMKIT_THREADS")) {
        try {
            const long n = stmkit::parse_long(env);
            if (n >= 1) {
                return static_cast<int>(n);
            }
        } catch (const FormatError&) {
            // fall through to the hardware default
        }
    }
    return stmkit::default_thread_count();
}

nlohmann::json effective_config_json(const RunConfig& config, int threads) {
    nlohmann::json doc;
    doc["input"] = config.input;
    doc["format"] = config.format;
    doc["out"] = config.out;
    doc["stopwords"] = config.stopwords;
    doc["boilerplate"] = config.boilerplate;
    doc["min_df"] = config.min_df;
    doc["year_scaling"] = config.year_scaling;
    doc["k"] = config.k;
    doc["sweep"] = config.sweep;
    if (config.seed) {
        doc["seed"] = *config.seed;
    }
    doc["tol"] = config.tol;
    doc["max_iters"] = config.max_iters;
    doc["ridge"] = config.ridge;
    doc["init"] = config.init;
    doc["corr_bin_width"] = config.corr_bin_width;
    doc["prev_bin_width"] = config.prev_bin_width;
    doc["top_pairs"] = config.top_pairs;
    doc["pair_convention"] = config.pair_convention;
    doc["svg"] = config.svg;
    doc["sigma_corr"] = config.sigma_corr;
    doc["threads"] = threads;
    doc["sweep_workers"] = config.sweep_workers;
    doc["k_star"] = config.k_star;
    doc["verbose"] = config.verbose;
    return doc;
}

void write_config_echo(const RunConfig& config, int threads,
                       const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto path = out_dir / "config_echo.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot open file for writing: " + path.string());
    }
    out << effective_config_json(config, threads).dump(2) << '\n';
    if (!out) {
        throw FormatError("write failed: " + path.string());
    }
}

void require_file(const std::filesystem::path& path, const char* hint) {
    if (!std::filesystem::exists(path)) {
        throw FormatError("missing " + path.string() + " (" + hint + ")");
    }
}

stmkit::IngestFormat parse_format(const std::string& name) {
    if (name == "jsonl") {
        return stmkit::IngestFormat::jsonl;
    }
    if (name == "csv") {
        return stmkit::IngestFormat::csv;
    }
    throw ConfigError("unknown input format: " + name +
                      " (expected jsonl or csv)");
}

stmkit::YearScaling parse_year_scaling(const std::string& name) {
    if (name == "center_scale") {
        return stmkit::YearScaling::center_scale;
    }
    if (name == "raw") {
        return stmkit::YearScaling::raw;
    }
    throw ConfigError("unknown year scaling: " + name +
                      " (expected center_scale or raw)");
}

std::vector<std::string> load_phrase_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open boilerplate file: " + path.string());
    }
    std::vector<std::string> phrases;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            phrases.push_back(line);
        }
    }
    return phrases;
}

std::vector<int> parse_sweep_range(const std::string& spec) {
    // LO:HI[:STEP], inclusive of HI when the step lands on it.
    std::vector<long> parts;
    std::size_t begin = 0;
    while (begin <= spec.size()) {
        const auto colon = spec.find(':', begin);
        const auto piece = spec.substr(
            begin, colon == std::string::npos ? std::string::npos : colon - begin);
        try {
            parts.push_back(stmkit::parse_long(piece));
        } catch (const FormatError&) {
            throw ConfigError("bad sweep range '" + spec +
                              "' (expected LO:HI:STEP)");
        }
        if (colon == std::string::npos) {
            break;
        }
        begin = colon + 1;
    }
    if (parts.size() < 2 || parts.size() > 3) {
        throw ConfigError("bad sweep range '" + spec + "' (expected LO:HI:STEP)");
    }
    const long lo = parts[0];
    const long hi = parts[1];
    const long step = parts.size() == 3 ? parts[2] : 1;
    if (lo < 2 || hi < lo || step < 1) {
        throw ConfigError("bad sweep range '" + spec +
                          "': need 2 <= LO <= HI and STEP >= 1");
    }
    std::vector<int> ks;
    for (long k = lo; k <= hi; k += step) {
        ks.push_back(static_cast<int>(k));
    }
    return ks;
}

stmkit::FitConfig make_fit_config(const RunConfig& config, int threads) {
    stmkit::FitConfig fit;
    fit.seed = config.seed.value_or(0);
    fit.max_em_iters = config.max_iters;
    fit.rel_tol = config.tol;
    fit.ridge = config.ridge;
    fit.init = stmkit::init_strategy_from_string(config.init);
    fit.threads = threads;
    return fit;
}

void require_seed(const RunConfig& config) {
    if (!config.seed) {
        throw ConfigError("--seed is required for fit and sweep");
    }
}

void require_exactly_one_of_k_sweep(const RunConfig& config) {
    if (config.k > 0 && !config.sweep.empty()) {
        throw ConfigError("give exactly one of --k and --sweep");
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_ingest(const RunConfig& config) {
    if (config.input.empty()) {
        throw ConfigError("--input is required for ingest");
    }
    require_file(config.input, "input corpus");
    const int threads = resolve_threads(config);

    const auto records =
        stmkit::ingest_records(config.input, parse_format(config.format));

    stmkit::CorpusConfig corpus_config;
    if (!config.stopwords.empty()) {
        corpus_config.preprocess.stopwords = stmkit::load_stopwords(
            std::filesystem::path(config.stopwords));
    }
    if (!config.boilerplate.empty()) {
        corpus_config.boilerplate = load_phrase_file(config.boilerplate);
    }
    corpus_config.min_df = config.min_df;
    corpus_config.year_scaling = parse_year_scaling(config.year_scaling);
    corpus_config.threads = threads;

    const auto artifacts = stmkit::build_corpus(records.documents, corpus_config);

    const std::filesystem::path out_dir(config.out);
    std::filesystem::create_directories(out_dir);
    stmkit::save_dtm(artifacts.dtm, out_dir / "dtm.txt");
    stmkit::save_vocabulary(artifacts.vocab, out_dir / "vocab.txt");
    stmkit::save_design(artifacts.design, out_dir / "design.csv");

    nlohmann::json drop_log;
    drop_log["missing_abstract"] = records.excluded_ids;
    drop_log["emptied_by_preprocessing"] = artifacts.dropped_empty_ids;
    {
        const auto path = out_dir / "drop_log.json";
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw FormatError("cannot open file for writing: " + path.string());
        }
        out << drop_log.dump(2) << '\n';
        if (!out) {
            throw FormatError("write failed: " + path.string());
        }
    }
    write_config_echo(config, threads, out_dir);

    std::cout << "ingest: documents=" << artifacts.dtm.n_docs()
              << " excluded_missing_abstract=" << records.excluded_missing_abstract
              << " emptied_by_preprocessing=" << artifacts.dropped_empty_ids.size()
              << " vocabulary=" << artifacts.vocab.size()
              << " tokens=" << artifacts.dtm.total_tokens() << '\n';
    return kExitOk;
}

struct LoadedArtifacts {
    stmkit::DocumentTermMatrix dtm;
    stmkit::Vocabulary vocab;
    stmkit::PrevalenceDesign design;
};

LoadedArtifacts load_artifacts(const std::filesystem::path& out_dir) {
    require_file(out_dir / "dtm.txt", "run ingest first");
    require_file(out_dir / "vocab.txt", "run ingest first");
    require_file(out_dir / "design.csv", "run ingest first");
    LoadedArtifacts artifacts;
    artifacts.dtm = stmkit::load_dtm(out_dir / "dtm.txt");
    artifacts.vocab = stmkit::load_vocabulary(out_dir / "vocab.txt");
    artifacts.design = stmkit::load_design(out_dir / "design.csv");
    if (artifacts.dtm.n_terms != artifacts.vocab.size()) {
        throw stmkit::ArtifactMismatchError(
            "vocab.txt has " + std::to_string(artifacts.vocab.size()) +
            " terms but dtm.txt expects " + std::to_string(artifacts.dtm.n_terms));
    }
    if (artifacts.dtm.n_docs() != artifacts.design.n_docs()) {
        throw stmkit::ArtifactMismatchError(
            "design.csv has " + std::to_string(artifacts.design.n_docs()) +
            " rows but dtm.txt has " + std::to_string(artifacts.dtm.n_docs()));
    }
    return artifacts;
}

// Analysis + export shared by fit and report. `theta` must already be the
// 6-significant-digit file image so both paths emit identical bytes.
std::map<std::string, std::string> run_analysis(
    const RunConfig& config, const Eigen::MatrixXd& theta,
    const Eigen::MatrixXd& beta, const stmkit::Vocabulary& vocab,
    const std::filesystem::path& out_dir) {
    const auto labels = stmkit::label_topics(beta, vocab, 7, 0.5);
    stmkit::save_labels_csv(labels, out_dir / "labels.csv");
    const auto convention =
        stmkit::pair_convention_from_string(config.pair_convention);
    const auto corr = stmkit::correlation_report(
        theta, convention, config.top_pairs, config.corr_bin_width);
    const auto prevalence =
        stmkit::prevalence_stats(theta, config.prev_bin_width);
    stmkit::ExportOptions options;
    options.svg = config.svg;
    auto manifest = stmkit::export_report(theta, labels, corr, prevalence,
                                          out_dir, options);
    if (config.verbose) {
        std::cerr << "analysis: pairs=" << corr.top_pairs.size()
                  << " corr_mean=" << stmkit::format_double(corr.stats.mean, 6)
                  << " prevalence_mean="
                  << stmkit::format_double(prevalence.mean, 6)
                  << " share_below="
                  << stmkit::format_double(prevalence.share_below_theoretical, 6)
                  << '\n';
    }
    return manifest;
}

void rewrite_manifest(const std::map<std::string, std::string>& manifest,
                      const std::filesystem::path& out_dir) {
    const auto path = out_dir / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot open file for writing: " + path.string());
    }
    out << nlohmann::json(manifest).dump(2) << '\n';
    if (!out) {
        throw FormatError("write failed: " + path.string());
    }
}

int cmd_fit(const RunConfig& config) {
    require_exactly_one_of_k_sweep(config);
    if (config.k < 2) {
        throw ConfigError("--k must be >= 2 for fit");
    }
    require_seed(config);
    const int threads = resolve_threads(config);
    const std::filesystem::path out_dir(config.out);
    auto artifacts = load_artifacts(out_dir);

    const auto fit_config = make_fit_config(config, threads);
    const auto result = stmkit::fit(artifacts.dtm, artifacts.design.X, config.k,
                                    fit_config);

    stmkit::ModelFile model;
    model.params = result.params;
    model.vocab_hash = stmkit::vocabulary_hash(artifacts.vocab);
    model.config = result.config_echo;
    model.elbo_trace = result.elbo_trace;
    stmkit::save_model(model, out_dir / "model.json");

    stmkit::save_theta_csv(stmkit::theta_matrix(result.posteriors),
                           out_dir / "theta.csv");
    // Analysis runs on the file image of theta so a later `report` from the
    // same directory reproduces identical CSVs.
    const Eigen::MatrixXd theta = stmkit::load_theta_csv(out_dir / "theta.csv");
    auto manifest =
        run_analysis(config, theta, result.params.beta, artifacts.vocab, out_dir);
    write_config_echo(config, threads, out_dir);

    std::cout << "fit: k=" << config.k << " em_iters=" << result.elbo_trace.size()
              << " converged=" << (result.converged ? "true" : "false")
              << " elbo=" << stmkit::format_double(result.elbo_trace.back(), 6)
              << '\n';

    if (!result.converged) {
        const auto flag_path = out_dir / "partial.flag";
        {
            std::ofstream out(flag_path, std::ios::binary);
            out << "fit stopped after " << result.elbo_trace.size()
                << " EM iterations without reaching tol="
                << stmkit::format_double(config.tol) << '\n';
        }
        manifest["partial.flag"] = stmkit::sha256_hex_file(flag_path);
        rewrite_manifest(manifest, out_dir);
        std::cerr << "error: fit did not converge within "
                  << config.max_iters
                  << " iterations; partial results flagged in manifest\n";
        return kExitConvergence;
    }
    return kExitOk;
}

int cmd_sweep(const RunConfig& config) {
    require_exactly_one_of_k_sweep(config);
    if (config.sweep.empty()) {
        throw ConfigError("--sweep LO:HI:STEP is required for sweep");
    }
    require_seed(config);
    const int threads = resolve_threads(config);
    const std::filesystem::path out_dir(config.out);
    auto artifacts = load_artifacts(out_dir);
    const auto ks = parse_sweep_range(config.sweep);

    stmkit::SweepConfig sweep_config;
    sweep_config.fit = make_fit_config(config, threads);
    sweep_config.checkpoint_dir = out_dir / "sweep_checkpoints";
    sweep_config.workers = config.sweep_workers;

    auto result = stmkit::k_sweep(artifacts.dtm, artifacts.design.X, ks,
                                  sweep_config);
    result.k_star = config.k_star;
    stmkit::save_sweep_csv(result, out_dir / "sweep.csv");
    write_config_echo(config, threads, out_dir);

    std::size_t succeeded = 0;
    for (const auto& entry : result.entries) {
        if (entry.fit_ok) {
            ++succeeded;
            if (config.verbose) {
                std::cerr << "sweep: k=" << entry.k << " se="
                          << stmkit::format_double(entry.se, 6) << " ex="
                          << stmkit::format_double(entry.ex, 6) << '\n';
            }
        } else {
            std::cerr << "sweep: k=" << entry.k << " failed: " << entry.error
                      << '\n';
        }
    }
    std::cout << "sweep: entries=" << result.entries.size()
              << " succeeded=" << succeeded << " candidates=";
    for (std::size_t i = 0; i < result.candidates.size(); ++i) {
        std::cout << (i > 0 ? "," : "") << result.candidates[i];
    }
    if (result.candidates.empty()) {
        std::cout << "none";
    }
    if (result.k_star > 0) {
        std::cout << " k_star=" << result.k_star;
    }
    std::cout << '\n';

    if (succeeded == 0) {
        std::cerr << "error: every sweep fit failed\n";
        return kExitConvergence;
    }
    return kExitOk;
}

int cmd_report(const RunConfig& config) {
    const int threads = resolve_threads(config);
    const std::filesystem::path out_dir(config.out);
    require_file(out_dir / "model.json", "run fit first");
    require_file(out_dir / "theta.csv", "run fit first");
    require_file(out_dir / "vocab.txt", "run ingest first");

    const auto model = stmkit::load_model(out_dir / "model.json");
    const auto vocab = stmkit::load_vocabulary(out_dir / "vocab.txt");
    if (stmkit::vocabulary_hash(vocab) != model.vocab_hash) {
        throw stmkit::ArtifactMismatchError(
            "vocab.txt does not match the vocabulary this model was fitted "
            "on (hash mismatch)");
    }
    const Eigen::MatrixXd theta = stmkit::load_theta_csv(out_dir / "theta.csv");
    if (theta.cols() != model.params.k) {
        throw stmkit::ArtifactMismatchError(
            "theta.csv has " + std::to_string(theta.cols()) +
            " topics but model.json declares k=" +
            std::to_string(model.params.k));
    }
    if (std::filesystem::exists(out_dir / "dtm.txt")) {
        const auto dtm = stmkit::load_dtm(out_dir / "dtm.txt");
        if (dtm.n_docs() != theta.rows()) {
            throw stmkit::ArtifactMismatchError(
                "theta.csv has " + std::to_string(theta.rows()) +
                " rows but dtm.txt has " + std::to_string(dtm.n_docs()) +
                " documents");
        }
    }

    run_analysis(config, theta, model.params.beta, vocab, out_dir);
    if (config.sigma_corr) {
        // Sensitivity view: correlations of the eta coordinates implied by
        // the fitted covariance (the pinned K-th coordinate has none).
        const Eigen::MatrixXd corr = stmkit::sigma_correlations(model.params.sigma);
        const auto path = out_dir / "sigma_correlations.csv";
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw FormatError("cannot open file for writing: " + path.string());
        }
        for (Eigen::Index j = 0; j < corr.cols(); ++j) {
            out << (j > 0 ? "," : "") << "eta_" << (j + 1);
        }
        out << '\n';
        for (Eigen::Index i = 0; i < corr.rows(); ++i) {
            for (Eigen::Index j = 0; j < corr.cols(); ++j) {
                out << (j > 0 ? "," : "")
                    << stmkit::format_double(corr(i, j), 6);
            }
            out << '\n';
        }
        if (!out) {
            throw FormatError("write failed: " + path.string());
        }
    }
    write_config_echo(config, threads, out_dir);

    std::cout << "report: k=" << model.params.k << " documents=" << theta.rows()
              << '\n';
    return kExitOk;
}

// CLI11 option wiring shared by all subcommands.
void add_common_options(CLI::App* sub, RunConfig& config) {
    sub->add_option("--config", "JSON config file; flags override its values")
        ->type_name("FILE");
    sub->add_option("--out", config.out, "output directory");
    sub->add_option("--seed",
                    [&config](const CLI::results_t& values) {
                        config.seed = std::stoull(values.front());
                        return true;
                    },
                    "random seed (required for fit/sweep)")
        ->type_name("UINT");
    sub->add_option("--threads", config.threads,
                    "worker threads (default: STMKIT_THREADS or hardware)");
    sub->add_flag("--verbose", config.verbose, "progress details on stderr");
}

void add_analysis_options(CLI::App* sub, RunConfig& config) {
    sub->add_option("--top-pairs", config.top_pairs,
                    "rows in top_pairs.csv");
    sub->add_option("--pair-convention", config.pair_convention,
                    "off-diagonal listing: unique or ordered");
    sub->add_option("--corr-bin-width", config.corr_bin_width,
                    "correlation histogram bin width");
    sub->add_option("--prev-bin-width", config.prev_bin_width,
                    "prevalence histogram bin width");
    sub->add_flag("--svg", config.svg, "emit minimal SVG density plots");
}

void add_model_options(CLI::App* sub, RunConfig& config) {
    sub->add_option("--tol", config.tol, "relative ELBO change to stop at");
    sub->add_option("--max-iters", config.max_iters, "EM iteration cap");
    sub->add_option("--ridge", config.ridge,
                    "ridge for the prevalence regression");
    sub->add_option("--init", config.init,
                    "initialization: seeded_random or anchor_spectral");
}

} // namespace

int main(int argc, char** argv) {
    RunConfig config;

    // --config must apply before the remaining flags so they can override it.
    for (int i = 1; i < argc; ++i) {
        const std::string_view arg = argv[i];
        try {
            if (arg == "--config" && i + 1 < argc) {
                apply_config_file(config, argv[i + 1]);
            } else if (arg.rfind("--config=", 0) == 0) {
                apply_config_file(config,
                                  std::string(arg.substr(sizeof("--config=") - 1)));
            }
        } catch (const stmkit::Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kExitInput;
        }
    }

    CLI::App app{"correlated topic modeling of abstract corpora"};
    app.require_subcommand(1);

    auto* ingest = app.add_subcommand("ingest",
                                      "clean a corpus into matrix artifacts");
    add_common_options(ingest, config);
    ingest->add_option("--input", config.input, "JSONL or CSV records");
    ingest->add_option("--format", config.format, "jsonl or csv");
    ingest->add_option("--stopwords", config.stopwords,
                       "stopword file replacing the bundled list");
    ingest->add_option("--boilerplate", config.boilerplate,
                       "file of boilerplate phrases, one per line");
    ingest->add_option("--min-df", config.min_df,
                       "minimum document frequency for vocabulary terms");
    ingest->add_option("--year-scaling", config.year_scaling,
                       "year covariate scaling: center_scale or raw");

    auto* fit = app.add_subcommand("fit", "fit the model at a fixed K");
    add_common_options(fit, config);
    fit->add_option("--k", config.k, "topic count (>= 2)");
    add_model_options(fit, config);
    add_analysis_options(fit, config);

    auto* sweep = app.add_subcommand("sweep",
                                     "fit a K range and score each fit");
    add_common_options(sweep, config);
    sweep->add_option("--sweep", config.sweep, "K range LO:HI:STEP (inclusive)");
    add_model_options(sweep, config);
    sweep->add_option("--sweep-workers", config.sweep_workers,
                      "concurrent K fits");
    sweep->add_option("--k-star", config.k_star,
                      "user-confirmed K echoed into the summary");

    auto* report = app.add_subcommand("report",
                                      "recompute analytics from a stored model");
    add_common_options(report, config);
    add_analysis_options(report, config);
    report->add_flag("--sigma-corr", config.sigma_corr,
                     "also write eta-scale correlations from sigma");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (ingest->parsed()) {
            return cmd_ingest(config);
        }
        if (fit->parsed()) {
            return cmd_fit(config);
        }
        if (sweep->parsed()) {
            return cmd_sweep(config);
        }
        return cmd_report(config);
    } catch (const stmkit::ArtifactMismatchError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitMismatch;
    } catch (const stmkit::NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const stmkit::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
}
