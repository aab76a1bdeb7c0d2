// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "stmkit/corpus.hpp"

namespace stmkit {

// One document row of the term matrix: (term index, count) pairs.
using SparseCounts = std::vector<std::pair<int, int>>;

enum class InitStrategy { seeded_random, anchor_spectral };

std::string to_string(InitStrategy strategy);
InitStrategy init_strategy_from_string(std::string_view name);

// ---------------------------------------------------------------------------
// Model state
// ---------------------------------------------------------------------------

// Correlated topic model with logistic-normal prevalence:
//   eta_d ~ N(X_d * gamma, sigma),  theta_d = softmax_augmented(eta_d),
//   w ~ Multinomial(theta_d' * beta).
// eta has K-1 free coordinates; topic K is pinned to 0 so the softmax is
// identified.
struct ModelParams {
    int k = 0;
    Eigen::MatrixXd beta;  // K x V, rows on the simplex, entries > 0
    Eigen::MatrixXd gamma; // P x (K-1) prevalence coefficients
    Eigen::MatrixXd sigma; // (K-1) x (K-1) SPD covariance

    int n_terms() const { return static_cast<int>(beta.cols()); }
    int n_covariates() const { return static_cast<int>(gamma.rows()); }
};

struct DocPosterior {
    Eigen::VectorXd lambda; // (K-1) variational mean of eta_d
    Eigen::MatrixXd nu;     // (K-1) x (K-1) variational covariance
    Eigen::VectorXd theta;  // K-simplex prevalence
    double objective = 0.0; // bound contribution f + 0.5 logdet nu - 0.5 logdet sigma
    bool converged = true;  // inner optimizer reached gradient tolerance
};

struct FitConfig {
    std::uint64_t seed = 0;
    int max_em_iters = 500;
    double rel_tol = 1e-5;       // relative ELBO change stopping rule
    double ridge = 1e-6;         // gamma normal-equations stabilizer
    InitStrategy init = InitStrategy::seeded_random;
    int threads = 1;
    int max_doc_iters = 250;     // per-document Newton cap
    double doc_grad_tol = 1e-6;  // per-document gradient norm target
};

struct FitResult {
    ModelParams params;
    std::vector<DocPosterior> posteriors;
    std::vector<double> elbo_trace; // one entry per EM iteration
    FitConfig config_echo;
    bool converged = false; // EM reached rel_tol before max_em_iters
};

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

// theta_k = exp(eta_k) / (1 + sum_j exp(eta_j)) for k < K and
// theta_K = 1 / (1 + sum_j exp(eta_j)), computed with max-subtraction.
Eigen::VectorXd softmax_augmented(const Eigen::VectorXd& eta);

struct ObjectiveEval {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

// f(eta) = -0.5 (eta-mu)' sigma_inv (eta-mu) + sum_v c_v log(theta(eta)' beta_v)
// with analytic gradient and Hessian in the K-1 free coordinates.
ObjectiveEval doc_objective(const Eigen::VectorXd& eta, const SparseCounts& counts,
                            const Eigen::MatrixXd& beta, const Eigen::VectorXd& mu,
                            const Eigen::MatrixXd& sigma_inv);

// Laplace E-step for one document: damped Newton ascent of doc_objective
// (backtracking line search, gradient-ascent fallback), then
// nu = (-hessian)^-1 repaired to SPD.
DocPosterior e_step_doc(const SparseCounts& counts, const ModelParams& params,
                        const Eigen::VectorXd& mu_d,
                        const FitConfig& config = FitConfig{});

// Token responsibilities phi_{v,k} = theta_k beta_{k,v} / sum_j theta_j beta_{j,v}
// for the document's support, one row per (term, count) entry in order.
Eigen::MatrixXd compute_phi(const Eigen::VectorXd& theta,
                            const Eigen::MatrixXd& beta,
                            const SparseCounts& counts);

// beta_{k,v} proportional to sum_d c_{d,v} phi_{d,v,k}; every cell gets a
// 1e-8 floor before row normalization so the log-likelihood stays finite.
Eigen::MatrixXd update_beta(const std::vector<Eigen::MatrixXd>& phis,
                            const DocumentTermMatrix& dtm);

// gamma = (X'X + ridge I)^-1 X' Lambda via Cholesky.
Eigen::MatrixXd update_gamma(const Eigen::MatrixXd& lambdas,
                             const Eigen::MatrixXd& X, double ridge);

// sigma = (1/D) sum_d [nu_d + r_d r_d'] with r_d = lambda_d - (X_d gamma)',
// symmetrized and jitter-repaired to SPD.
Eigen::MatrixXd update_sigma(const std::vector<DocPosterior>& posteriors,
                             const Eigen::MatrixXd& X,
                             const Eigen::MatrixXd& gamma);

// Variational bound: sum_d [f_d(lambda_d) + 0.5 logdet nu_d] - (D/2) logdet sigma,
// evaluated under the given params (entropy/prior constants cancel exactly).
double elbo(const ModelParams& params, const std::vector<DocPosterior>& posteriors,
            const DocumentTermMatrix& dtm, const Eigen::MatrixXd& X);

// seeded_random: beta rows ~ Dirichlet(0.1) from the counter-based generator;
// anchor_spectral: Gram-Schmidt anchor rows of the normalized word
// co-occurrence matrix. Either way gamma = 0 and sigma = I.
ModelParams init_params(const DocumentTermMatrix& dtm, int k, std::uint64_t seed,
                        InitStrategy strategy, int n_covariates = 1);

// Alternates a parallel E-step with single-threaded, document-ordered
// M-step reductions, so results are bit-identical for any thread count.
FitResult fit(const DocumentTermMatrix& dtm, const Eigen::MatrixXd& X, int k,
              const FitConfig& config);

// D x K matrix of per-document topic proportions.
Eigen::MatrixXd theta_matrix(const std::vector<DocPosterior>& posteriors);

// ---------------------------------------------------------------------------
// Numerical helpers
// ---------------------------------------------------------------------------

// Cholesky factorization of `a`, adding 1e-8 * (1 + |trace|/dim) to the
// diagonal and doubling up to 5 times if needed; `a` is mutated to the
// repaired matrix. Throws NumericalError when repair fails.
Eigen::LLT<Eigen::MatrixXd> spd_cholesky(Eigen::MatrixXd& a);

// log(det(a)) from a successful Cholesky factorization.
double cholesky_logdet(const Eigen::LLT<Eigen::MatrixXd>& llt);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

struct ModelFile {
    ModelParams params;
    std::string vocab_hash;
    FitConfig config;
    std::vector<double> elbo_trace;
};

// Single JSON document: {k, vocab_hash, beta (row-major), gamma, sigma,
// config_echo, elbo_trace}.
void save_model(const ModelFile& model, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

// CSV with header topic_1..topic_K, 6 significant digits.
void save_theta_csv(const Eigen::MatrixXd& theta, const std::filesystem::path& path);
Eigen::MatrixXd load_theta_csv(const std::filesystem::path& path);

} // namespace stmkit
