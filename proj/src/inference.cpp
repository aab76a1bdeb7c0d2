// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors
//
// EM fitting of the correlated topic model. The E-step is a per-document
// Laplace approximation around the MAP of eta (damped Newton); the M-step
// re-estimates beta (responsibility counts), gamma (ridge least squares)
// and sigma (moment update). Document reductions always run in document
// order so fitted values do not depend on the thread count.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stmkit/csv.hpp"
#include "stmkit/errors.hpp"
#include "stmkit/inference.hpp"
#include "stmkit/numfmt.hpp"
#include "stmkit/parallel.hpp"
#include "stmkit/rng.hpp"

namespace stmkit {

namespace {

constexpr double kBetaFloor = 1e-8;

// Derivation streams for the counter-based generator, so independent draws
// never share a key.
constexpr std::uint64_t kStreamBetaInit = 1;

double doc_likelihood_value(const Eigen::VectorXd& theta,
                            const Eigen::MatrixXd& beta,
                            const SparseCounts& counts) {
    double value = 0.0;
    for (const auto& [v, c] : counts) {
        const double p = theta.dot(beta.col(v));
        value += static_cast<double>(c) * std::log(p);
    }
    return value;
}

// Objective value only (no derivatives); used by the bound evaluation.
double doc_objective_value(const Eigen::VectorXd& eta, const SparseCounts& counts,
                           const Eigen::MatrixXd& beta, const Eigen::VectorXd& mu,
                           const Eigen::MatrixXd& sigma_inv) {
    const Eigen::VectorXd diff = eta - mu;
    const double quad = -0.5 * diff.dot(sigma_inv * diff);
    const Eigen::VectorXd theta = softmax_augmented(eta);
    return quad + doc_likelihood_value(theta, beta, counts);
}

std::string eta_to_string(const Eigen::VectorXd& eta) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += format_double(eta(i));
    }
    out += "]";
    return out;
}

// Backtracking ascent along `direction`; on success advances x/eval and
// returns true.
bool line_search_ascent(const SparseCounts& counts, const Eigen::MatrixXd& beta,
                        const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma_inv,
                        Eigen::VectorXd& x, ObjectiveEval& eval,
                        const Eigen::VectorXd& direction) {
    double step = 1.0;
    for (int halving = 0; halving < 40; ++halving) {
        const Eigen::VectorXd candidate = x + step * direction;
        const double value =
            doc_objective_value(candidate, counts, beta, mu, sigma_inv);
        if (std::isfinite(value) && value > eval.value) {
            x = candidate;
            eval = doc_objective(candidate, counts, beta, mu, sigma_inv);
            return true;
        }
        step *= 0.5;
    }
    return false;
}

DocPosterior e_step_impl(const SparseCounts& counts, const Eigen::MatrixXd& beta,
                         const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma_inv,
                         double logdet_sigma, Eigen::VectorXd x,
                         int max_iters, double grad_tol) {
    ObjectiveEval eval = doc_objective(x, counts, beta, mu, sigma_inv);
    bool converged = false;
    for (int iter = 0; iter < max_iters; ++iter) {
        if (eval.gradient.norm() < grad_tol) {
            converged = true;
            break;
        }
        Eigen::VectorXd direction;
        bool have_newton = true;
        try {
            Eigen::MatrixXd neg_hessian = -eval.hessian;
            const auto llt = spd_cholesky(neg_hessian);
            direction = llt.solve(eval.gradient);
        } catch (const NumericalError&) {
            have_newton = false;
        }
        bool advanced = false;
        if (have_newton) {
            advanced = line_search_ascent(counts, beta, mu, sigma_inv, x, eval,
                                          direction);
        }
        if (!advanced) {
            // Gradient-ascent fallback when the Newton step is unusable.
            advanced = line_search_ascent(counts, beta, mu, sigma_inv, x, eval,
                                          eval.gradient);
        }
        if (!advanced) {
            break; // stuck: keep the best iterate found so far
        }
    }
    if (!converged) {
        converged = eval.gradient.norm() < grad_tol;
    }

    DocPosterior posterior;
    posterior.lambda = x;
    Eigen::MatrixXd neg_hessian = -eval.hessian;
    const auto llt = spd_cholesky(neg_hessian);
    const Eigen::Index dim = x.size();
    posterior.nu = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
    const double logdet_nu = -cholesky_logdet(llt);
    posterior.theta = softmax_augmented(x);
    posterior.objective = eval.value + 0.5 * logdet_nu - 0.5 * logdet_sigma;
    posterior.converged = converged;
    return posterior;
}

Eigen::MatrixXd finalize_beta(Eigen::MatrixXd& accumulator) {
    accumulator.array() += kBetaFloor;
    for (Eigen::Index k = 0; k < accumulator.rows(); ++k) {
        accumulator.row(k) /= accumulator.row(k).sum();
    }
    return std::move(accumulator);
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows, const char* name) {
    if (!rows.is_array()) {
        throw FormatError(std::string("model field '") + name +
                          "' must be an array of rows");
    }
    const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
    Eigen::Index c = -1;
    Eigen::MatrixXd m;
    for (Eigen::Index i = 0; i < r; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array()) {
            throw FormatError(std::string("model field '") + name +
                              "' must contain numeric rows");
        }
        if (c < 0) {
            c = static_cast<Eigen::Index>(row.size());
            m.resize(r, c);
        }
        if (static_cast<Eigen::Index>(row.size()) != c) {
            throw FormatError(std::string("model field '") + name +
                              "' has ragged rows");
        }
        for (Eigen::Index j = 0; j < c; ++j) {
            m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
        }
    }
    if (r == 0) {
        m.resize(0, 0);
    }
    return m;
}

} // namespace

std::string to_string(InitStrategy strategy) {
    return strategy == InitStrategy::seeded_random ? "seeded_random"
                                                   : "anchor_spectral";
}

InitStrategy init_strategy_from_string(std::string_view name) {
    if (name == "seeded_random") {
        return InitStrategy::seeded_random;
    }
    if (name == "anchor_spectral") {
        return InitStrategy::anchor_spectral;
    }
    throw ConfigError("unknown init strategy: " + std::string(name) +
                      " (expected seeded_random or anchor_spectral)");
}

Eigen::VectorXd softmax_augmented(const Eigen::VectorXd& eta) {
    if (!eta.allFinite()) {
        throw NumericalError("softmax_augmented: non-finite eta " +
                             eta_to_string(eta));
    }
    const Eigen::Index km1 = eta.size();
    // The implicit K-th coordinate is 0, so the max-subtraction must include 0.
    const double m = km1 > 0 ? std::max(0.0, eta.maxCoeff()) : 0.0;
    Eigen::VectorXd theta(km1 + 1);
    double denom = std::exp(-m);
    for (Eigen::Index i = 0; i < km1; ++i) {
        theta(i) = std::exp(eta(i) - m);
        denom += theta(i);
    }
    theta(km1) = std::exp(-m);
    theta /= denom;
    return theta;
}

ObjectiveEval doc_objective(const Eigen::VectorXd& eta, const SparseCounts& counts,
                            const Eigen::MatrixXd& beta, const Eigen::VectorXd& mu,
                            const Eigen::MatrixXd& sigma_inv) {
    const Eigen::Index km1 = eta.size();
    const Eigen::VectorXd theta = softmax_augmented(eta);
    const Eigen::VectorXd theta_head = theta.head(km1);

    ObjectiveEval eval;
    const Eigen::VectorXd diff = eta - mu;
    const Eigen::VectorXd sigma_inv_diff = sigma_inv * diff;
    eval.value = -0.5 * diff.dot(sigma_inv_diff);

    Eigen::VectorXd cphi = Eigen::VectorXd::Zero(km1);
    Eigen::MatrixXd phi_outer = Eigen::MatrixXd::Zero(km1, km1);
    double n_tokens = 0.0;
    for (const auto& [v, count] : counts) {
        const double c = static_cast<double>(count);
        const Eigen::VectorXd weighted = theta.cwiseProduct(beta.col(v));
        const double p = weighted.sum();
        eval.value += c * std::log(p);
        const Eigen::VectorXd phi_head = weighted.head(km1) / p;
        cphi += c * phi_head;
        phi_outer.noalias() += c * phi_head * phi_head.transpose();
        n_tokens += c;
    }

    eval.gradient = -sigma_inv_diff + cphi - n_tokens * theta_head;
    eval.hessian = -sigma_inv;
    eval.hessian += cphi.asDiagonal();
    eval.hessian -= phi_outer;
    eval.hessian -= n_tokens *
        (Eigen::MatrixXd(theta_head.asDiagonal()) -
         theta_head * theta_head.transpose());

    if (!std::isfinite(eval.value) || !eval.gradient.allFinite() ||
        !eval.hessian.allFinite()) {
        throw NumericalError("doc_objective: non-finite result at eta = " +
                             eta_to_string(eta));
    }
    return eval;
}

DocPosterior e_step_doc(const SparseCounts& counts, const ModelParams& params,
                        const Eigen::VectorXd& mu_d, const FitConfig& config) {
    const Eigen::Index km1 = params.k - 1;
    if (mu_d.size() != km1) {
        throw ValidationError("e_step_doc: mu has dimension " +
                              std::to_string(mu_d.size()) + ", expected " +
                              std::to_string(km1));
    }
    Eigen::MatrixXd sigma = params.sigma;
    const auto llt = spd_cholesky(sigma);
    const Eigen::MatrixXd sigma_inv =
        llt.solve(Eigen::MatrixXd::Identity(km1, km1));
    const double logdet_sigma = cholesky_logdet(llt);
    return e_step_impl(counts, params.beta, mu_d, sigma_inv, logdet_sigma, mu_d,
                       config.max_doc_iters, config.doc_grad_tol);
}

Eigen::MatrixXd compute_phi(const Eigen::VectorXd& theta,
                            const Eigen::MatrixXd& beta,
                            const SparseCounts& counts) {
    const Eigen::Index k = theta.size();
    Eigen::MatrixXd phi(static_cast<Eigen::Index>(counts.size()), k);
    for (std::size_t r = 0; r < counts.size(); ++r) {
        const Eigen::VectorXd weighted = theta.cwiseProduct(beta.col(counts[r].first));
        phi.row(static_cast<Eigen::Index>(r)) = weighted.transpose() / weighted.sum();
    }
    return phi;
}

Eigen::MatrixXd update_beta(const std::vector<Eigen::MatrixXd>& phis,
                            const DocumentTermMatrix& dtm) {
    if (phis.size() != dtm.rows.size()) {
        throw ValidationError("update_beta: responsibilities for " +
                              std::to_string(phis.size()) + " docs but matrix has " +
                              std::to_string(dtm.rows.size()));
    }
    if (phis.empty()) {
        throw ValidationError("update_beta: empty corpus");
    }
    const Eigen::Index k = phis.front().cols();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(k, dtm.n_terms);
    for (std::size_t d = 0; d < phis.size(); ++d) {
        const auto& row = dtm.rows[d];
        for (std::size_t r = 0; r < row.size(); ++r) {
            acc.col(row[r].first) += static_cast<double>(row[r].second) *
                                     phis[d].row(static_cast<Eigen::Index>(r))
                                         .transpose();
        }
    }
    return finalize_beta(acc);
}

Eigen::MatrixXd update_gamma(const Eigen::MatrixXd& lambdas,
                             const Eigen::MatrixXd& X, double ridge) {
    if (lambdas.rows() != X.rows()) {
        throw ValidationError("update_gamma: row mismatch between lambda and X");
    }
    if (ridge < 0.0) {
        throw ConfigError("ridge must be >= 0");
    }
    const Eigen::Index p = X.cols();
    Eigen::MatrixXd normal = X.transpose() * X;
    normal.diagonal().array() += ridge;
    const Eigen::LLT<Eigen::MatrixXd> llt(normal);
    Eigen::MatrixXd gamma;
    if (llt.info() == Eigen::Success) {
        gamma = llt.solve(X.transpose() * lambdas);
    }
    if (llt.info() != Eigen::Success || !gamma.allFinite()) {
        if (ridge == 0.0) {
            throw NumericalError(
                "prevalence normal equations are singular; set ridge > 0");
        }
        throw NumericalError("prevalence regression failed for ridge = " +
                             format_double(ridge) +
                             "; try a larger ridge");
    }
    (void)p;
    return gamma;
}

Eigen::MatrixXd update_sigma(const std::vector<DocPosterior>& posteriors,
                             const Eigen::MatrixXd& X,
                             const Eigen::MatrixXd& gamma) {
    const std::size_t d = posteriors.size();
    if (d < 2) {
        throw ValidationError("update_sigma needs at least 2 documents");
    }
    const Eigen::Index km1 = gamma.cols();
    const Eigen::MatrixXd mu = X * gamma; // D x (K-1)
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(km1, km1);
    for (std::size_t i = 0; i < d; ++i) {
        const Eigen::VectorXd residual =
            posteriors[i].lambda - mu.row(static_cast<Eigen::Index>(i)).transpose();
        sigma += posteriors[i].nu;
        sigma.noalias() += residual * residual.transpose();
    }
    sigma /= static_cast<double>(d);
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
    // spd_cholesky leaves the repaired (jittered) matrix in place.
    Eigen::MatrixXd repaired = sigma;
    spd_cholesky(repaired);
    return repaired;
}

double elbo(const ModelParams& params, const std::vector<DocPosterior>& posteriors,
            const DocumentTermMatrix& dtm, const Eigen::MatrixXd& X) {
    const std::size_t d = posteriors.size();
    if (d == 0) {
        throw ValidationError("elbo: empty corpus");
    }
    if (dtm.rows.size() != d || static_cast<std::size_t>(X.rows()) != d) {
        throw ValidationError("elbo: inconsistent document counts");
    }
    const Eigen::Index km1 = params.k - 1;
    Eigen::MatrixXd sigma = params.sigma;
    const auto llt = spd_cholesky(sigma);
    const Eigen::MatrixXd sigma_inv =
        llt.solve(Eigen::MatrixXd::Identity(km1, km1));
    const double logdet_sigma = cholesky_logdet(llt);
    const Eigen::MatrixXd mu = X * params.gamma;

    double bound = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double f = doc_objective_value(
            posteriors[i].lambda, dtm.rows[i], params.beta,
            mu.row(static_cast<Eigen::Index>(i)).transpose(), sigma_inv);
        Eigen::MatrixXd nu = posteriors[i].nu;
        const double logdet_nu = cholesky_logdet(spd_cholesky(nu));
        bound += f + 0.5 * logdet_nu;
    }
    bound -= 0.5 * static_cast<double>(d) * logdet_sigma;
    if (!std::isfinite(bound)) {
        throw NumericalError("elbo: non-finite bound");
    }
    return bound;
}

ModelParams init_params(const DocumentTermMatrix& dtm, int k, std::uint64_t seed,
                        InitStrategy strategy, int n_covariates) {
    if (k < 2) {
        throw ConfigError("topic count must be >= 2, got " + std::to_string(k));
    }
    if (n_covariates < 1) {
        throw ConfigError("design must include at least the intercept");
    }
    const int v = dtm.n_terms;
    if (v < 1) {
        throw ValidationError("empty vocabulary");
    }

    ModelParams params;
    params.k = k;
    params.gamma = Eigen::MatrixXd::Zero(n_covariates, k - 1);
    params.sigma = Eigen::MatrixXd::Identity(k - 1, k - 1);
    params.beta.resize(k, v);

    if (strategy == InitStrategy::seeded_random) {
        for (int row = 0; row < k; ++row) {
            CounterRng rng(seed, kStreamBetaInit, static_cast<std::uint64_t>(row));
            for (int col = 0; col < v; ++col) {
                params.beta(row, col) = rng.next_gamma(0.1);
            }
        }
        params.beta = finalize_beta(params.beta);
        return params;
    }

    // anchor_spectral: pick K mutually extreme rows of the row-normalized
    // word co-occurrence matrix by Gram-Schmidt, then seed each topic with
    // its anchor's co-occurrence profile.
    Eigen::MatrixXd cooc = Eigen::MatrixXd::Zero(v, v);
    for (const auto& row : dtm.rows) {
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(v);
        for (const auto& [term, count] : row) {
            counts(term) = static_cast<double>(count);
        }
        cooc.noalias() += counts * counts.transpose();
        cooc.diagonal() -= counts; // a token does not co-occur with itself
    }
    std::vector<int> usable;
    for (int term = 0; term < v; ++term) {
        const double total = cooc.row(term).sum();
        if (total > 0.0) {
            cooc.row(term) /= total;
            usable.push_back(term);
        }
    }
    if (static_cast<int>(usable.size()) < k) {
        throw ConfigError("anchor initialization needs at least K terms with "
                          "co-occurrences; have " +
                          std::to_string(usable.size()));
    }

    std::vector<Eigen::VectorXd> basis;
    std::vector<int> anchors;
    std::vector<Eigen::VectorXd> residuals(usable.size());
    for (std::size_t i = 0; i < usable.size(); ++i) {
        residuals[i] = cooc.row(usable[i]).transpose();
    }
    for (int a = 0; a < k; ++a) {
        int best = -1;
        double best_norm = -1.0;
        for (std::size_t i = 0; i < usable.size(); ++i) {
            const double n = residuals[i].norm();
            if (n > best_norm + 1e-15) { // ties resolve to the lowest index
                best_norm = n;
                best = static_cast<int>(i);
            }
        }
        if (best < 0 || best_norm <= 1e-12) {
            throw ConfigError("anchor initialization ran out of independent "
                              "co-occurrence rows at anchor " + std::to_string(a));
        }
        anchors.push_back(usable[static_cast<std::size_t>(best)]);
        Eigen::VectorXd q = residuals[static_cast<std::size_t>(best)].normalized();
        basis.push_back(q);
        for (auto& r : residuals) {
            r -= q.dot(r) * q;
        }
    }
    for (int row = 0; row < k; ++row) {
        params.beta.row(row) = cooc.row(anchors[static_cast<std::size_t>(row)]);
    }
    params.beta = finalize_beta(params.beta);
    return params;
}

FitResult fit(const DocumentTermMatrix& dtm, const Eigen::MatrixXd& X, int k,
              const FitConfig& config) {
    const int d = dtm.n_docs();
    const int v = dtm.n_terms;
    const int p = static_cast<int>(X.cols());
    if (k < 2) {
        throw ConfigError("topic count must be >= 2, got " + std::to_string(k));
    }
    if (k > d || k > v) {
        throw ConfigError("topic count " + std::to_string(k) +
                          " exceeds corpus size (D=" + std::to_string(d) +
                          ", V=" + std::to_string(v) + ")");
    }
    if (d != static_cast<int>(X.rows())) {
        throw ValidationError("document-term matrix and design are not row-aligned");
    }
    if (d <= p) {
        throw ConfigError("need more documents than covariates (D=" +
                          std::to_string(d) + ", P=" + std::to_string(p) + ")");
    }
    for (int i = 0; i < d; ++i) {
        if (dtm.rows[static_cast<std::size_t>(i)].empty()) {
            throw ValidationError("document " + std::to_string(i) +
                                  " has no in-vocabulary tokens");
        }
    }

    FitResult result;
    result.config_echo = config;
    result.params = init_params(dtm, k, config.seed, config.init, p);
    result.posteriors.assign(static_cast<std::size_t>(d), DocPosterior{});
    const Eigen::Index km1 = k - 1;
    for (auto& posterior : result.posteriors) {
        posterior.lambda = Eigen::VectorXd::Zero(km1);
    }

    double previous = std::numeric_limits<double>::quiet_NaN();
    for (int iter = 0; iter < config.max_em_iters; ++iter) {
        // E-step under the current parameters, warm-started at the previous
        // per-document optimum.
        Eigen::MatrixXd sigma = result.params.sigma;
        const auto llt = spd_cholesky(sigma);
        const Eigen::MatrixXd sigma_inv =
            llt.solve(Eigen::MatrixXd::Identity(km1, km1));
        const double logdet_sigma = cholesky_logdet(llt);
        const Eigen::MatrixXd mu = X * result.params.gamma;

        parallel_blocks(d, config.threads, [&](int, int lo, int hi) {
            for (int i = lo; i < hi; ++i) {
                const auto idx = static_cast<std::size_t>(i);
                result.posteriors[idx] = e_step_impl(
                    dtm.rows[idx], result.params.beta, mu.row(i).transpose(),
                    sigma_inv, logdet_sigma, result.posteriors[idx].lambda,
                    config.max_doc_iters, config.doc_grad_tol);
            }
        });

        // M-step: document-ordered reductions keep this deterministic.
        Eigen::MatrixXd beta_acc = Eigen::MatrixXd::Zero(k, v);
        Eigen::MatrixXd lambdas(d, km1);
        for (int i = 0; i < d; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            const Eigen::VectorXd& theta = result.posteriors[idx].theta;
            for (const auto& [term, count] : dtm.rows[idx]) {
                const Eigen::VectorXd weighted =
                    theta.cwiseProduct(result.params.beta.col(term));
                beta_acc.col(term) +=
                    (static_cast<double>(count) / weighted.sum()) * weighted;
            }
            lambdas.row(i) = result.posteriors[idx].lambda.transpose();
        }
        result.params.beta = finalize_beta(beta_acc);
        result.params.gamma = update_gamma(lambdas, X, config.ridge);
        result.params.sigma = update_sigma(result.posteriors, X, result.params.gamma);

        const double bound = elbo(result.params, result.posteriors, dtm, X);
        result.elbo_trace.push_back(bound);
        if (iter > 0) {
            const double change = std::abs(bound - previous);
            if (change < config.rel_tol * std::abs(previous)) {
                result.converged = true;
                break;
            }
        }
        previous = bound;
    }
    return result;
}

Eigen::MatrixXd theta_matrix(const std::vector<DocPosterior>& posteriors) {
    if (posteriors.empty()) {
        return Eigen::MatrixXd(0, 0);
    }
    const Eigen::Index k = posteriors.front().theta.size();
    Eigen::MatrixXd theta(static_cast<Eigen::Index>(posteriors.size()), k);
    for (std::size_t i = 0; i < posteriors.size(); ++i) {
        theta.row(static_cast<Eigen::Index>(i)) = posteriors[i].theta.transpose();
    }
    return theta;
}

Eigen::LLT<Eigen::MatrixXd> spd_cholesky(Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) {
        throw ValidationError("spd_cholesky: matrix must be square");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success && a.allFinite()) {
        return llt;
    }
    const double dim = static_cast<double>(a.rows());
    const double base = 1e-8 * (1.0 + std::abs(a.trace()) / std::max(dim, 1.0));
    double jitter = base;
    for (int attempt = 0; attempt <= 5; ++attempt) {
        Eigen::MatrixXd repaired = a;
        repaired.diagonal().array() += jitter;
        llt.compute(repaired);
        if (llt.info() == Eigen::Success && repaired.allFinite()) {
            a = std::move(repaired);
            return llt;
        }
        jitter *= 2.0;
    }
    throw NumericalError("matrix is not positive definite after jitter repair");
}

double cholesky_logdet(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

void save_model(const ModelFile& model, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["k"] = model.params.k;
    doc["vocab_hash"] = model.vocab_hash;
    doc["beta"] = matrix_to_json(model.params.beta);
    doc["gamma"] = matrix_to_json(model.params.gamma);
    doc["sigma"] = matrix_to_json(model.params.sigma);
    doc["config_echo"] = {
        {"seed", model.config.seed},
        {"max_em_iters", model.config.max_em_iters},
        {"rel_tol", model.config.rel_tol},
        {"ridge", model.config.ridge},
        {"init", to_string(model.config.init)},
        {"threads", model.config.threads},
        {"max_doc_iters", model.config.max_doc_iters},
        {"doc_grad_tol", model.config.doc_grad_tol},
    };
    doc["elbo_trace"] = model.elbo_trace;

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot open file for writing: " + path.string());
    }
    out << doc.dump(2) << '\n';
    if (!out) {
        throw FormatError("write failed: " + path.string());
    }
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open model file: " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": invalid JSON: " + e.what());
    }
    const char* required[] = {"k",     "vocab_hash", "beta",      "gamma",
                              "sigma", "config_echo", "elbo_trace"};
    for (const char* field : required) {
        if (!doc.contains(field)) {
            throw FormatError(path.string() + ": missing model field '" +
                              field + "'");
        }
    }

    ModelFile model;
    model.params.k = doc["k"].get<int>();
    model.vocab_hash = doc["vocab_hash"].get<std::string>();
    model.params.beta = matrix_from_json(doc["beta"], "beta");
    model.params.gamma = matrix_from_json(doc["gamma"], "gamma");
    model.params.sigma = matrix_from_json(doc["sigma"], "sigma");
    const auto& echo = doc["config_echo"];
    model.config.seed = echo.value("seed", std::uint64_t{0});
    model.config.max_em_iters = echo.value("max_em_iters", 500);
    model.config.rel_tol = echo.value("rel_tol", 1e-5);
    model.config.ridge = echo.value("ridge", 1e-6);
    model.config.init =
        init_strategy_from_string(echo.value("init", std::string("seeded_random")));
    model.config.threads = echo.value("threads", 1);
    model.config.max_doc_iters = echo.value("max_doc_iters", 250);
    model.config.doc_grad_tol = echo.value("doc_grad_tol", 1e-6);
    model.elbo_trace = doc["elbo_trace"].get<std::vector<double>>();

    if (model.params.beta.rows() != model.params.k) {
        throw FormatError(path.string() + ": beta row count does not match k");
    }
    if (model.params.gamma.cols() != model.params.k - 1 ||
        model.params.sigma.rows() != model.params.k - 1 ||
        model.params.sigma.cols() != model.params.k - 1) {
        throw FormatError(path.string() + ": parameter shapes do not match k");
    }
    return model;
}

void save_theta_csv(const Eigen::MatrixXd& theta,
                    const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot open file for writing: " + path.string());
    }
    for (Eigen::Index k = 0; k < theta.cols(); ++k) {
        if (k > 0) {
            out << ',';
        }
        out << "topic_" << (k + 1);
    }
    out << '\n';
    for (Eigen::Index i = 0; i < theta.rows(); ++i) {
        for (Eigen::Index k = 0; k < theta.cols(); ++k) {
            if (k > 0) {
                out << ',';
            }
            out << format_double(theta(i, k), 6);
        }
        out << '\n';
    }
    if (!out) {
        throw FormatError("write failed: " + path.string());
    }
}

Eigen::MatrixXd load_theta_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open theta file: " + path.string());
    }
    const auto records = parse_csv(in);
    if (records.empty()) {
        throw FormatError(path.string() + ": missing header");
    }
    const auto& header = records.front().fields;
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (header[k] != "topic_" + std::to_string(k + 1)) {
            throw FormatError(path.string() +
                              ": header must be topic_1..topic_K, got '" +
                              header[k] + "'");
        }
    }
    Eigen::MatrixXd theta(static_cast<Eigen::Index>(records.size() - 1),
                          static_cast<Eigen::Index>(header.size()));
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != header.size()) {
            throw FormatError(path.string() + ": line " +
                              std::to_string(rec.line) + ": expected " +
                              std::to_string(header.size()) + " fields");
        }
        for (std::size_t k = 0; k < header.size(); ++k) {
            try {
                theta(static_cast<Eigen::Index>(r - 1),
                      static_cast<Eigen::Index>(k)) = parse_double(rec.fields[k]);
            } catch (const FormatError&) {
                throw FormatError(path.string() + ": line " +
                                  std::to_string(rec.line) +
                                  ": expected number, got '" + rec.fields[k] + "'");
            }
        }
    }
    return theta;
}

} // namespace stmkit
