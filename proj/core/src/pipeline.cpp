#include "wlogit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wlogit/error.hpp"

namespace wlogit {

std::string to_string(HConvention h) {
    return h == HConvention::fisher ? "fisher" : "literal";
}

HConvention parse_h_convention(const std::string& s) {
    if (s == "fisher") return HConvention::fisher;
    if (s == "literal") return HConvention::literal;
    throw InvalidArgument("unknown h convention '" + s + "' (expected fisher or literal)");
}

WhiteningTransform build_whitening(const Dataset& data, const WhiteningOptions& opts,
                                   const std::optional<SymMatrix>& sigma_override) {
    data.validate();
    const FitResult ridge =
        ridge_logistic(data, opts.lambda_ridge, opts.ridge_maxit, opts.ridge_tol);
    return build_whitening(data, ridge.beta, opts, sigma_override);
}

WhiteningTransform build_whitening(const Dataset& data, const Vector& beta_ridge,
                                   const WhiteningOptions& opts,
                                   const std::optional<SymMatrix>& sigma_override) {
    data.validate();
    if (beta_ridge.size() != data.p()) throw DimensionMismatch("ridge coefficients do not match p");

    const Vector pi = clip_probabilities(predict_prob(data.X, beta_ridge));
    Vector h(pi.size());
    for (Eigen::Index i = 0; i < pi.size(); ++i) {
        h(i) = opts.h_convention == HConvention::fisher ? pi(i) * (1.0 - pi(i))
                                                         : pi(i) / (1.0 - pi(i));
    }

    double rho = 0.0;
    std::optional<SymMatrix> sigma;
    if (sigma_override) {
        if (sigma_override->dim() != data.p()) throw DimensionMismatch("covariance override does not match p");
        sigma = *sigma_override;
    } else {
        const Matrix weighted = h.array().sqrt().matrix().asDiagonal() * data.X;
        const SymMatrix s = sample_covariance(weighted);
        Shrinkage sh = shrink(s, data.n(), opts.shrinkage_rho);
        const bool use_shrinkage =
            opts.covariance == CovarianceMethod::shrinkage ||
            (opts.covariance == CovarianceMethod::adaptive && sh.rho >= opts.adaptive_threshold);
        rho = sh.rho;
        if (use_shrinkage) {
            sigma = std::move(sh.sigma);
        } else {
            sigma = diagonal_loading(s, opts.diagonal_loading);
        }
    }

    const double floor = opts.eig_floor ? *opts.eig_floor : default_eig_floor(*sigma);
    SqrtPair pair = sym_sqrt_pair(*sigma, floor);
    return WhiteningTransform{std::move(*sigma), std::move(pair), std::move(h), beta_ridge, rho};
}

Matrix whiten(const Matrix& x, const WhiteningTransform& t) {
    if (x.cols() != t.dim()) throw DimensionMismatch("design columns do not match the whitening transform");
    return x * t.pair.inv_sqrt.matrix();
}

Vector to_whitened(const Vector& beta, const WhiteningTransform& t) {
    if (beta.size() != t.dim()) throw DimensionMismatch("coefficients do not match the whitening transform");
    return t.pair.sqrt.matrix() * beta;
}

Vector back_transform(const Vector& beta_tilde, const WhiteningTransform& t) {
    if (beta_tilde.size() != t.dim()) throw DimensionMismatch("coefficients do not match the whitening transform");
    return t.pair.inv_sqrt.matrix() * beta_tilde;
}

BetaTildeFit fit_beta_tilde(const Dataset& data, const WhiteningTransform& t, double lambda,
                            const SolverOptions& opts) {
    return fit_beta_tilde(data, t, lambda, to_whitened(t.beta_ridge, t), opts);
}

BetaTildeFit fit_beta_tilde(const Dataset& data, const WhiteningTransform& t, double lambda,
                            const Vector& init_tilde, const SolverOptions& opts) {
    data.validate();
    if (data.p() != t.dim()) throw DimensionMismatch("dataset does not match the whitening transform");
    const Matrix& root = t.pair.sqrt.matrix();
    const Vector init = back_transform(init_tilde, t);
    const FitResult r = irls_lasso(data, lambda, init, opts, [&root](const Vector& a, const Vector& b) {
        return (root * (a - b)).cwiseAbs().maxCoeff();
    });
    BetaTildeFit out;
    out.beta = r.beta;
    out.beta_tilde = root * r.beta;
    out.converged = r.converged;
    out.iterations = r.iterations;
    return out;
}

std::vector<Eigen::Index> top_indices(const Vector& v, Eigen::Index k) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    const auto cmp = [&v](Eigen::Index a, Eigen::Index b) {
        const double fa = std::abs(v(a));
        const double fb = std::abs(v(b));
        return fa > fb || (fa == fb && a < b);
    };
    const auto kk = static_cast<std::ptrdiff_t>(std::clamp<Eigen::Index>(k, 0, v.size()));
    std::partial_sort(idx.begin(), idx.begin() + kk, idx.end(), cmp);
    idx.resize(static_cast<std::size_t>(kk));
    return idx;
}

namespace {

void check_cutoff(Eigen::Index k, Eigen::Index p, const char* what) {
    if (k < 1 || k > p) {
        throw InvalidArgument(std::string(what) + " = " + std::to_string(k) +
                              " outside [1, " + std::to_string(p) + "]");
    }
}

}  // namespace

Vector topk_correct(const Vector& beta_tilde0, Eigen::Index k, bool keep_sign) {
    check_cutoff(k, beta_tilde0.size(), "K");
    const auto top = top_indices(beta_tilde0, k);
    const double level = std::abs(beta_tilde0(top.back()));
    std::vector<bool> keep(static_cast<std::size_t>(beta_tilde0.size()), false);
    for (Eigen::Index j : top) keep[static_cast<std::size_t>(j)] = true;
    Vector out = beta_tilde0;
    for (Eigen::Index j = 0; j < out.size(); ++j) {
        // Entries tied with the K-th magnitude are left alone, which keeps the
        // unsigned fill idempotent when ties change which indices rank in the top K.
        if (keep[static_cast<std::size_t>(j)] || std::abs(out(j)) == level) continue;
        out(j) = (keep_sign && beta_tilde0(j) < 0.0) ? -level : level;
    }
    return out;
}

Vector threshold_M(const Vector& beta0, Eigen::Index m) {
    check_cutoff(m, beta0.size(), "M");
    Vector out = Vector::Zero(beta0.size());
    for (Eigen::Index j : top_indices(beta0, m)) out(j) = beta0(j);
    return out;
}

Eigen::Index select_cutoff(const std::vector<double>& nll, double gamma, CutoffRule rule) {
    if (nll.empty()) throw InvalidArgument("cutoff selection needs a non-empty sequence");
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must lie in (0, 1)");
    for (std::size_t k = 0; k + 1 < nll.size(); ++k) {
        const double ratio = rule == CutoffRule::literal ? nll[k] / nll[k + 1] : nll[k + 1] / nll[k];
        if (ratio >= gamma || !std::isfinite(ratio)) return static_cast<Eigen::Index>(k + 1);
    }
    return static_cast<Eigen::Index>(nll.size());
}

Eigen::Index candidate_cap(const CutoffOptions& opts, Eigen::Index n, Eigen::Index p) {
    const Eigen::Index automatic = std::min(p, 2 * n);
    if (opts.cap <= 0) return automatic;
    return std::min(opts.cap, p);
}

CutoffChoice select_K(const Dataset& data, const Matrix& x_tilde, const Vector& beta_tilde0,
                      const CutoffOptions& opts) {
    if (x_tilde.cols() != beta_tilde0.size() || x_tilde.rows() != data.n()) {
        throw DimensionMismatch("whitened design does not match the coefficients or labels");
    }
    const Eigen::Index cap = candidate_cap(opts, data.n(), beta_tilde0.size());
    CutoffChoice choice;
    choice.nll.reserve(static_cast<std::size_t>(cap));
    for (Eigen::Index k = 1; k <= cap; ++k) {
        const Vector corrected = topk_correct(beta_tilde0, k, opts.signed_correction);
        choice.nll.push_back(-log_likelihood_linear(data.y, x_tilde * corrected));
    }
    choice.count = select_cutoff(choice.nll, opts.gamma_k, opts.rule);
    choice.beta = topk_correct(beta_tilde0, choice.count, opts.signed_correction);
    return choice;
}

CutoffChoice select_K(const Dataset& data, const WhiteningTransform& t,
                      const Vector& beta_tilde0, const CutoffOptions& opts) {
    return select_K(data, whiten(data.X, t), beta_tilde0, opts);
}

CutoffChoice select_M(const Dataset& data, const Vector& beta0, const CutoffOptions& opts) {
    if (beta0.size() != data.p()) throw DimensionMismatch("coefficients do not match p");
    const Eigen::Index cap = candidate_cap(opts, data.n(), data.p());
    const auto order = top_indices(beta0, cap);
    CutoffChoice choice;
    choice.nll.reserve(order.size());
    // The M-th model adds one column to the (M-1)-th linear predictor.
    Vector eta = Vector::Zero(data.n());
    for (Eigen::Index j : order) {
        if (beta0(j) != 0.0) eta.noalias() += beta0(j) * data.X.col(j);
        choice.nll.push_back(-log_likelihood_linear(data.y, eta));
    }
    choice.count = select_cutoff(choice.nll, opts.gamma_m, opts.rule);
    choice.beta = threshold_M(beta0, choice.count);
    return choice;
}

std::size_t select_lambda(const std::vector<LambdaCandidate>& candidates) {
    if (candidates.empty()) throw InvalidArgument("lambda selection needs at least one candidate");
    constexpr double tie = 1e-10;
    double best_ll = candidates.front().loglik;
    for (const auto& c : candidates) best_ll = std::max(best_ll, c.loglik);
    std::size_t best = candidates.size();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        if (!(c.loglik >= best_ll - tie)) continue;
        if (best == candidates.size()) {
            best = i;
            continue;
        }
        const auto& b = candidates[best];
        if (c.support_size < b.support_size ||
            (c.support_size == b.support_size && c.lambda > b.lambda)) {
            best = i;
        }
    }
    return best;
}

Vector WLogitModel::coefficients_original_scale() const {
    return beta_hat.cwiseQuotient(standardization.scale);
}

WLogitModel fit(const Dataset& data, const FitConfig& config) {
    data.validate(true);
    WLogitModel model;
    model.standardization =
        config.standardize ? Standardization::fit(data.X) : Standardization::identity(data.p());
    const Dataset ds{model.standardization.apply(data.X), data.y};

    auto transform = std::make_shared<const WhiteningTransform>(
        build_whitening(ds, config.whitening, config.sigma_override));
    const Matrix x_tilde = whiten(ds.X, *transform);

    const std::vector<double> lambdas =
        config.lambdas.empty() ? lambda_grid(ds, config.n_lambda, config.lambda_ratio)
                               : config.lambdas;

    std::vector<LambdaCandidate> candidates;
    candidates.reserve(lambdas.size());
    Vector warm = to_whitened(transform->beta_ridge, *transform);
    for (double lam : lambdas) {
        BetaTildeFit bt = fit_beta_tilde(ds, *transform, lam, warm, config.solver);
        warm = bt.beta_tilde;

        CutoffChoice k = select_K(ds, x_tilde, bt.beta_tilde, config.cutoff);
        const Vector beta0 = back_transform(k.beta, *transform);
        CutoffChoice m = select_M(ds, beta0, config.cutoff);

        PathEntry e;
        e.lambda = lam;
        e.beta_tilde0 = std::move(bt.beta_tilde);
        e.beta_tilde = std::move(k.beta);
        e.k_hat = k.count;
        e.m_hat = m.count;
        e.loglik = log_likelihood(ds, m.beta);
        e.beta = std::move(m.beta);
        e.converged = bt.converged;
        candidates.push_back({lam, static_cast<Eigen::Index>(support(e.beta).size()), e.loglik});
        model.path.push_back(std::move(e));
    }

    const std::size_t best = select_lambda(candidates);
    const PathEntry& chosen = model.path[best];
    model.beta_hat = chosen.beta;
    model.beta_tilde_hat = chosen.beta_tilde;
    model.beta_tilde0_hat = chosen.beta_tilde0;
    model.lambda_hat = chosen.lambda;
    model.k_hat = chosen.k_hat;
    model.m_hat = chosen.m_hat;
    model.gamma_k = config.cutoff.gamma_k;
    model.gamma_m = config.cutoff.gamma_m;
    model.support = support(model.beta_hat);
    model.loglik = chosen.loglik;
    model.h_convention = config.whitening.h_convention;
    model.transform = std::move(transform);
    return model;
}

Prediction predict(const WLogitModel& model, const Matrix& x_new, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("threshold must lie in (0, 1)");
    if (x_new.cols() != model.p()) {
        throw DimensionMismatch("model expects " + std::to_string(model.p()) + " features, got " +
                                std::to_string(x_new.cols()));
    }
    Prediction out;
    out.probabilities = predict_prob(model.standardization.apply(x_new), model.beta_hat);
    out.labels = (out.probabilities.array() >= threshold).cast<int>();
    return out;
}

}  // namespace wlogit
