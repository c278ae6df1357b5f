#pragma once

#include <functional>
#include <vector>

#include "wlogit/linalg.hpp"

namespace wlogit {

/// Probabilities are clipped to [kProbClip, 1 - kProbClip] before forming
/// IRLS weights so that working responses stay finite near separation.
inline constexpr double kProbClip = 1e-5;

/// Design matrix (rows are samples) with binary labels stored as 0.0 / 1.0.
struct Dataset {
    Matrix X;
    Vector y;

    Eigen::Index n() const noexcept { return X.rows(); }
    Eigen::Index p() const noexcept { return X.cols(); }

    /// Throws DataError / InsufficientSamples / DimensionMismatch when the
    /// record is malformed; with @p require_both_classes also rejects
    /// single-class labels.
    void validate(bool require_both_classes = false) const;

    Eigen::Index positives() const;
};

/// Column centering and scaling (population standard deviation, divisor n).
/// Columns with zero spread keep scale 1.
struct Standardization {
    Vector center;
    Vector scale;

    static Standardization fit(const Matrix& x);
    static Standardization identity(Eigen::Index p);

    Matrix apply(const Matrix& x) const;
    bool is_identity() const;
};

/// Logistic function evaluated without overflow.
double sigmoid(double t);
/// log(1 + exp(t)) evaluated without overflow.
double log1p_exp(double t);

Vector predict_prob(const Matrix& x, const Vector& beta);
Vector clip_probabilities(Vector pi, double clip = kProbClip);

/// Average log-likelihood (1/n) sum_i [y_i eta_i - log(1 + exp(eta_i))].
double log_likelihood(const Dataset& data, const Vector& beta);
double log_likelihood_linear(const Vector& y, const Vector& eta);

/// Gradient of log_likelihood: (1/n) X^T (y - pi).
Vector log_likelihood_gradient(const Dataset& data, const Vector& beta);

/// Quantities of one quadratic approximation of the log-likelihood.
struct IrlsState {
    Vector beta;
    Vector pi;  ///< clipped probabilities
    Vector w;   ///< pi (1 - pi)
    Vector z;   ///< working response eta + (y - pi) / w
};

IrlsState irls_quantities(const Dataset& data, const Vector& beta);

struct FitResult {
    Vector beta;
    bool converged = false;
    int iterations = 0;
};

struct SolverOptions {
    int maxit = 50;          ///< outer IRLS / Newton iterations
    int max_sweeps = 1000;   ///< coordinate-descent sweeps per inner solve
    double tol = 1e-4;       ///< max-abs coefficient change between outer iterations
    double cd_tol = 1e-6;    ///< KKT tolerance of the inner solve
};

/// Minimizes -l(beta) + (lambda_ridge / 2) ||beta||^2 by damped Newton steps.
/// Uses the n x n dual system when p > n. Never throws on non-convergence.
FitResult ridge_logistic(const Dataset& data, double lambda_ridge, int maxit = 50,
                         double tol = 1e-4);

/// Cyclic coordinate descent for (1/2n) ||zw - Xw beta||^2 + lambda ||beta||_1.
/// Alternates full sweeps with sweeps restricted to the active set and stops
/// once the KKT violation over all coordinates is at most @p tol.
FitResult weighted_lasso_cd(const Matrix& xw, const Vector& zw, double lambda,
                            const Vector& beta_init, int max_sweeps = 1000, double tol = 1e-6);

double weighted_lasso_objective(const Matrix& xw, const Vector& zw, double lambda,
                                const Vector& beta);
/// max_j of the KKT residual of the weighted lasso at beta.
double weighted_lasso_kkt_violation(const Matrix& xw, const Vector& zw, double lambda,
                                    const Vector& beta);

/// -l(beta) + lambda ||beta||_1.
double penalized_objective(const Dataset& data, const Vector& beta, double lambda);

/// Distance between consecutive outer iterates used as the stopping rule.
using ChangeMeasure = std::function<double(const Vector& previous, const Vector& next)>;

/// IRLS outer loop around weighted_lasso_cd, warm-started from @p beta_init.
/// An outer step that increases the penalized objective is halved (at most 20
/// times) before it is accepted.
FitResult irls_lasso(const Dataset& data, double lambda, const Vector& beta_init,
                     const SolverOptions& opts, const ChangeMeasure& change);

/// l1-penalized logistic regression (no intercept), started at zero unless a
/// warm start is supplied.
FitResult lasso_logistic(const Dataset& data, double lambda, const SolverOptions& opts = {});
FitResult lasso_logistic(const Dataset& data, double lambda, const Vector& beta_init,
                         const SolverOptions& opts = {});

/// Warm-started fits along a (descending) lambda sequence.
std::vector<FitResult> lasso_path(const Dataset& data, const std::vector<double>& lambdas,
                                  const SolverOptions& opts = {});

double lambda_max(const Dataset& data);

/// Geometric grid from lambda_max down to ratio * lambda_max.
std::vector<double> lambda_grid(const Dataset& data, int n_lambda = 30, double ratio = 0.01);

/// Indices of nonzero entries, ascending.
std::vector<Eigen::Index> support(const Vector& beta);

}  // namespace wlogit
