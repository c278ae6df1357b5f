#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wlogit/glm.hpp"
#include "wlogit/linalg.hpp"

namespace wlogit {

/// Diagonal weights used to form the matrix whose covariance is whitened.
enum class HConvention {
    fisher,   ///< H_ii = pi (1 - pi), the IRLS weight
    literal,  ///< H_ii = pi / (1 - pi)
};

enum class CovarianceMethod {
    shrinkage,      ///< linear shrinkage towards a scaled identity
    sample_loaded,  ///< sample covariance plus diagonal loading
    adaptive,       ///< shrinkage when its intensity reaches the threshold, else sample_loaded
};

/// How consecutive negative log-likelihoods are compared when choosing K or M.
enum class CutoffRule {
    nll_ratio,  ///< smallest K with nll[K+1] / nll[K] >= gamma
    literal,    ///< smallest K with nll[K] / nll[K+1] >= gamma
};

std::string to_string(HConvention h);
HConvention parse_h_convention(const std::string& s);

struct WhiteningOptions {
    double lambda_ridge = 1.0;
    int ridge_maxit = 50;
    double ridge_tol = 1e-8;
    HConvention h_convention = HConvention::fisher;
    CovarianceMethod covariance = CovarianceMethod::adaptive;
    std::optional<double> shrinkage_rho;  ///< fixes the intensity instead of estimating it
    double diagonal_loading = 5e-3;       ///< relative to trace / p, for sample_loaded
    double adaptive_threshold = 0.5;      ///< shrinkage intensity at which adaptive switches
    std::optional<double> eig_floor;      ///< absolute floor; default 1e-6 * largest eigenvalue
};

struct WhiteningTransform {
    SymMatrix sigma_check;
    SqrtPair pair;
    Vector h_diag;
    Vector beta_ridge;
    double shrinkage_rho = 0.0;

    Eigen::Index dim() const noexcept { return sigma_check.dim(); }
};

/// Ridge fit, H estimate, covariance of H^{1/2} X, and its square-root pair.
/// A @p sigma_override replaces the covariance estimate (H and the ridge fit
/// are still computed).
WhiteningTransform build_whitening(const Dataset& data, const WhiteningOptions& opts = {},
                                   const std::optional<SymMatrix>& sigma_override = std::nullopt);
/// Same, with the ridge coefficients supplied by the caller.
WhiteningTransform build_whitening(const Dataset& data, const Vector& beta_ridge,
                                   const WhiteningOptions& opts = {},
                                   const std::optional<SymMatrix>& sigma_override = std::nullopt);

/// X * Sigma^{-1/2}.
Matrix whiten(const Matrix& x, const WhiteningTransform& t);
/// Sigma^{1/2} * beta: coefficients of the whitened model.
Vector to_whitened(const Vector& beta, const WhiteningTransform& t);
/// Sigma^{-1/2} * beta_tilde.
Vector back_transform(const Vector& beta_tilde, const WhiteningTransform& t);

struct BetaTildeFit {
    Vector beta_tilde;
    Vector beta;  ///< Sigma^{-1/2} beta_tilde, the same fit in original coordinates
    bool converged = false;
    int iterations = 0;
};

/// Solves the whitened quadratic-approximation problem penalized by
/// ||Sigma^{-1/2} beta_tilde||_1. The inner solves run in beta = Sigma^{-1/2}
/// beta_tilde on the original design, where the penalty becomes ||beta||_1;
/// convergence is measured on beta_tilde.
BetaTildeFit fit_beta_tilde(const Dataset& data, const WhiteningTransform& t, double lambda,
                            const SolverOptions& opts = {});
/// Warm-started variant; @p init_tilde defaults to Sigma^{1/2} beta_ridge.
BetaTildeFit fit_beta_tilde(const Dataset& data, const WhiteningTransform& t, double lambda,
                            const Vector& init_tilde, const SolverOptions& opts = {});

/// Indices of the k largest |v_j|, ties broken by lower index, in rank order.
std::vector<Eigen::Index> top_indices(const Vector& v, Eigen::Index k);

/// Keeps the K largest-magnitude entries and sets the magnitude of every other
/// entry to the K-th largest magnitude, keeping its sign (zero counts as +)
/// unless @p keep_sign is false. Entries already at that magnitude are unchanged.
Vector topk_correct(const Vector& beta_tilde0, Eigen::Index k, bool keep_sign = true);

/// Keeps the M largest-magnitude entries and zeroes the rest.
Vector threshold_M(const Vector& beta0, Eigen::Index m);

/// Ratio-based knee on a sequence of negative log-likelihoods indexed by
/// cutoff 1..L. Returns the chosen cutoff (1-based); L if no cutoff qualifies.
Eigen::Index select_cutoff(const std::vector<double>& nll, double gamma,
                           CutoffRule rule = CutoffRule::nll_ratio);

struct CutoffOptions {
    double gamma_k = 0.95;  ///< knee level for the Top-K correction
    double gamma_m = 0.99;  ///< knee level for the Top-M threshold
    CutoffRule rule = CutoffRule::nll_ratio;
    Eigen::Index cap = 0;  ///< largest candidate K / M; 0 means min(p, 2n)
    bool signed_correction = false;
};

Eigen::Index candidate_cap(const CutoffOptions& opts, Eigen::Index n, Eigen::Index p);

struct CutoffChoice {
    Eigen::Index count = 1;
    Vector beta;
    std::vector<double> nll;  ///< negative log-likelihood per candidate, index 0 is cutoff 1
};

/// Chooses K from the whitened likelihood of topk_correct(beta_tilde0, K).
CutoffChoice select_K(const Dataset& data, const Matrix& x_tilde, const Vector& beta_tilde0,
                      const CutoffOptions& opts = {});
CutoffChoice select_K(const Dataset& data, const WhiteningTransform& t,
                      const Vector& beta_tilde0, const CutoffOptions& opts = {});

/// Chooses M from the likelihood of threshold_M(beta0, M).
CutoffChoice select_M(const Dataset& data, const Vector& beta0, const CutoffOptions& opts = {});

struct LambdaCandidate {
    double lambda = 0.0;
    Eigen::Index support_size = 0;
    double loglik = 0.0;
};

/// argmax of loglik; ties within 1e-10 go to the smaller support, then the larger lambda.
std::size_t select_lambda(const std::vector<LambdaCandidate>& candidates);

struct FitConfig {
    CutoffOptions cutoff;
    int n_lambda = 30;
    double lambda_ratio = 0.01;
    std::vector<double> lambdas;  ///< explicit grid; overrides n_lambda / lambda_ratio
    bool standardize = true;
    WhiteningOptions whitening;
    SolverOptions solver;
    std::optional<SymMatrix> sigma_override;
};

struct PathEntry {
    double lambda = 0.0;
    Vector beta_tilde0;     ///< uncorrected whitened estimate
    Vector beta_tilde;      ///< after the Top-K correction
    Vector beta;            ///< final thresholded estimate
    Eigen::Index k_hat = 0;
    Eigen::Index m_hat = 0;
    double loglik = 0.0;
    bool converged = false;
};

struct WLogitModel {
    Vector beta_hat;          ///< standardized-feature coefficients
    Vector beta_tilde_hat;    ///< corrected whitened coefficients at lambda_hat
    Vector beta_tilde0_hat;   ///< uncorrected whitened coefficients at lambda_hat
    double lambda_hat = 0.0;
    Eigen::Index k_hat = 0;
    Eigen::Index m_hat = 0;
    double gamma_k = 0.95;
    double gamma_m = 0.99;
    std::vector<Eigen::Index> support;
    double loglik = 0.0;
    HConvention h_convention = HConvention::fisher;
    Standardization standardization;
    std::vector<std::string> feature_names;
    std::shared_ptr<const WhiteningTransform> transform;  ///< empty for a loaded model
    std::vector<PathEntry> path;

    Eigen::Index p() const noexcept { return beta_hat.size(); }
    /// Coefficients on the original feature scale (beta_j / scale_j).
    Vector coefficients_original_scale() const;
};

/// Whitening, per-lambda estimation with Top-K correction and Top-M threshold,
/// then lambda selection by likelihood.
WLogitModel fit(const Dataset& data, const FitConfig& config = {});

struct Prediction {
    Vector probabilities;
    Eigen::VectorXi labels;
};

/// Probabilities on the caller's (unstandardized) features; label 1 when p >= threshold.
Prediction predict(const WLogitModel& model, const Matrix& x_new, double threshold = 0.5);

}  // namespace wlogit
