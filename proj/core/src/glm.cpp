#include "wlogit/glm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wlogit/error.hpp"

namespace wlogit {

void Dataset::validate(bool require_both_classes) const {
    if (X.rows() < 2) {
        throw InsufficientSamples("dataset needs at least 2 samples, got " +
                                  std::to_string(X.rows()));
    }
    if (X.cols() < 1) throw DataError("dataset needs at least 1 feature");
    if (y.size() != X.rows()) {
        std::ostringstream os;
        os << "label count " << y.size() << " does not match sample count " << X.rows();
        throw DimensionMismatch(os.str());
    }
    if (!X.allFinite()) throw DataError("design matrix has non-finite entries");
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y(i) != 0.0 && y(i) != 1.0) {
            throw DataError("label at row " + std::to_string(i) + " is not 0 or 1");
        }
    }
    if (require_both_classes) {
        const Eigen::Index pos = positives();
        if (pos == 0 || pos == y.size()) throw DataError("labels contain a single class");
    }
}

Eigen::Index Dataset::positives() const {
    return static_cast<Eigen::Index>((y.array() == 1.0).count());
}

Standardization Standardization::fit(const Matrix& x) {
    Standardization s;
    s.center = x.colwise().mean().transpose();
    s.scale.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double var = (x.col(j).array() - s.center(j)).square().mean();
        const double sd = std::sqrt(var);
        s.scale(j) = sd > 1e-12 ? sd : 1.0;
    }
    return s;
}

Standardization Standardization::identity(Eigen::Index p) {
    return Standardization{Vector::Zero(p), Vector::Ones(p)};
}

Matrix Standardization::apply(const Matrix& x) const {
    if (x.cols() != center.size()) {
        throw DimensionMismatch("standardization expects " + std::to_string(center.size()) +
                                " columns, got " + std::to_string(x.cols()));
    }
    return (x.rowwise() - center.transpose()).array().rowwise() / scale.transpose().array();
}

bool Standardization::is_identity() const {
    return (center.array() == 0.0).all() && (scale.array() == 1.0).all();
}

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double log1p_exp(double t) {
    if (t > 0.0) return t + std::log1p(std::exp(-t));
    return std::log1p(std::exp(t));
}

Vector predict_prob(const Matrix& x, const Vector& beta) {
    if (x.cols() != beta.size()) {
        std::ostringstream os;
        os << "design has " << x.cols() << " columns but beta has " << beta.size() << " entries";
        throw DimensionMismatch(os.str());
    }
    const Vector eta = x * beta;
    return eta.unaryExpr([](double t) { return sigmoid(t); });
}

Vector clip_probabilities(Vector pi, double clip) {
    return pi.cwiseMax(clip).cwiseMin(1.0 - clip);
}

double log_likelihood_linear(const Vector& y, const Vector& eta) {
    if (y.size() != eta.size()) throw DimensionMismatch("label and linear predictor sizes differ");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) acc += y(i) * eta(i) - log1p_exp(eta(i));
    return acc / static_cast<double>(y.size());
}

double log_likelihood(const Dataset& data, const Vector& beta) {
    if (data.p() != beta.size()) throw DimensionMismatch("beta length does not match feature count");
    return log_likelihood_linear(data.y, data.X * beta);
}

Vector log_likelihood_gradient(const Dataset& data, const Vector& beta) {
    const Vector pi = predict_prob(data.X, beta);
    return data.X.transpose() * (data.y - pi) / static_cast<double>(data.n());
}

IrlsState irls_quantities(const Dataset& data, const Vector& beta) {
    if (data.p() != beta.size()) throw DimensionMismatch("beta length does not match feature count");
    IrlsState st;
    st.beta = beta;
    const Vector eta = data.X * beta;
    st.pi = clip_probabilities(eta.unaryExpr([](double t) { return sigmoid(t); }));
    st.w = st.pi.array() * (1.0 - st.pi.array());
    st.z = eta.array() + (data.y - st.pi).array() / st.w.array();
    return st;
}

namespace {

double ridge_objective(const Dataset& data, const Vector& beta, double lambda_ridge) {
    return -log_likelihood(data, beta) + 0.5 * lambda_ridge * beta.squaredNorm();
}

}  // namespace

FitResult ridge_logistic(const Dataset& data, double lambda_ridge, int maxit, double tol) {
    if (!(lambda_ridge > 0.0)) throw InvalidArgument("ridge penalty must be positive");
    data.validate();
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    const double nd = static_cast<double>(n);

    FitResult res;
    res.beta = Vector::Zero(p);
    double obj = ridge_objective(data, res.beta, lambda_ridge);

    for (int it = 1; it <= maxit; ++it) {
        res.iterations = it;
        const Vector eta = data.X * res.beta;
        const Vector pi = eta.unaryExpr([](double t) { return sigmoid(t); });
        const Vector w = clip_probabilities(pi).unaryExpr([](double q) { return q * (1.0 - q); });
        const Vector grad =
            -data.X.transpose() * (data.y - pi) / nd + lambda_ridge * res.beta;

        Vector step;
        if (p > n) {
            // (lambda I + A^T A)^{-1} g with A = diag(sqrt(w / n)) X.
            const Matrix a = (w.array() / nd).sqrt().matrix().asDiagonal() * data.X;
            Matrix inner = a * a.transpose();
            inner.diagonal().array() += lambda_ridge;
            const Vector ag = a * grad;
            step = (grad - a.transpose() * inner.ldlt().solve(ag)) / lambda_ridge;
        } else {
            Matrix hess = data.X.transpose() * w.asDiagonal() * data.X / nd;
            hess.diagonal().array() += lambda_ridge;
            step = hess.ldlt().solve(grad);
        }

        double t = 1.0;
        Vector cand = res.beta - step;
        double cand_obj = ridge_objective(data, cand, lambda_ridge);
        for (int h = 0; h < 30 && !(cand_obj <= obj); ++h) {
            t *= 0.5;
            cand = res.beta - t * step;
            cand_obj = ridge_objective(data, cand, lambda_ridge);
        }
        if (!(cand_obj <= obj)) break;  // no descent possible; keep current iterate

        const double change = (cand - res.beta).cwiseAbs().maxCoeff();
        res.beta = std::move(cand);
        obj = cand_obj;
        if (change < tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

namespace {

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

double kkt_from_residual(const Matrix& xw, const Vector& r, double lambda, const Vector& beta) {
    const Vector g = xw.transpose() * r / static_cast<double>(xw.rows());
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        double v = 0.0;
        if (beta(j) > 0.0) {
            v = std::abs(g(j) - lambda);
        } else if (beta(j) < 0.0) {
            v = std::abs(g(j) + lambda);
        } else {
            v = std::max(0.0, std::abs(g(j)) - lambda);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

void check_lasso_dims(const Matrix& xw, const Vector& zw, const Vector& beta) {
    if (zw.size() != xw.rows()) throw DimensionMismatch("response length does not match design rows");
    if (beta.size() != xw.cols()) throw DimensionMismatch("beta length does not match design columns");
}

}  // namespace

FitResult weighted_lasso_cd(const Matrix& xw, const Vector& zw, double lambda,
                            const Vector& beta_init, int max_sweeps, double tol) {
    check_lasso_dims(xw, zw, beta_init);
    if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
    const Eigen::Index n = xw.rows();
    const Eigen::Index p = xw.cols();
    const double nd = static_cast<double>(n);

    const Vector a = xw.colwise().squaredNorm().transpose() / nd;
    FitResult res;
    res.beta = beta_init;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (a(j) == 0.0) res.beta(j) = 0.0;
    }
    Vector r = zw - xw * res.beta;

    auto update = [&](Eigen::Index j) {
        if (a(j) == 0.0) return 0.0;
        const double old = res.beta(j);
        const double g = xw.col(j).dot(r) / nd + a(j) * old;
        const double next = soft_threshold(g, lambda) / a(j);
        const double d = next - old;
        if (d != 0.0) {
            r.noalias() -= d * xw.col(j);
            res.beta(j) = next;
        }
        return std::abs(d) * std::sqrt(a(j));
    };

    std::vector<Eigen::Index> active;
    active.reserve(static_cast<std::size_t>(p));
    int sweeps = 0;
    while (sweeps < max_sweeps) {
        for (Eigen::Index j = 0; j < p; ++j) update(j);
        ++sweeps;

        active.clear();
        for (Eigen::Index j = 0; j < p; ++j) {
            if (res.beta(j) != 0.0) active.push_back(j);
        }
        while (!active.empty() && sweeps < max_sweeps) {
            double biggest = 0.0;
            for (Eigen::Index j : active) biggest = std::max(biggest, update(j));
            ++sweeps;
            if (biggest < 0.1 * tol) break;
        }

        r = zw - xw * res.beta;
        if (kkt_from_residual(xw, r, lambda, res.beta) <= tol) {
            res.converged = true;
            break;
        }
    }
    res.iterations = sweeps;
    return res;
}

double weighted_lasso_objective(const Matrix& xw, const Vector& zw, double lambda,
                                const Vector& beta) {
    check_lasso_dims(xw, zw, beta);
    return (zw - xw * beta).squaredNorm() / (2.0 * static_cast<double>(xw.rows())) +
           lambda * beta.lpNorm<1>();
}

double weighted_lasso_kkt_violation(const Matrix& xw, const Vector& zw, double lambda,
                                    const Vector& beta) {
    check_lasso_dims(xw, zw, beta);
    return kkt_from_residual(xw, zw - xw * beta, lambda, beta);
}

double penalized_objective(const Dataset& data, const Vector& beta, double lambda) {
    return -log_likelihood(data, beta) + lambda * beta.lpNorm<1>();
}

FitResult irls_lasso(const Dataset& data, double lambda, const Vector& beta_init,
                     const SolverOptions& opts, const ChangeMeasure& change) {
    if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
    if (beta_init.size() != data.p()) throw DimensionMismatch("warm start length does not match p");

    FitResult res;
    res.beta = beta_init;
    double obj = penalized_objective(data, res.beta, lambda);
    const double slack = 1e-12;

    for (int it = 1; it <= opts.maxit; ++it) {
        res.iterations = it;
        const IrlsState st = irls_quantities(data, res.beta);
        const Vector sw = st.w.array().sqrt();
        const Matrix xw = sw.asDiagonal() * data.X;
        const Vector zw = sw.cwiseProduct(st.z);
        Vector cand = weighted_lasso_cd(xw, zw, lambda, res.beta, opts.max_sweeps, opts.cd_tol).beta;

        double cand_obj = penalized_objective(data, cand, lambda);
        for (int h = 0; h < 20 && cand_obj > obj + slack * (1.0 + std::abs(obj)); ++h) {
            cand = 0.5 * (res.beta + cand);
            cand_obj = penalized_objective(data, cand, lambda);
        }

        const double d = change(res.beta, cand);
        res.beta = std::move(cand);
        obj = cand_obj;
        if (d < opts.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

FitResult lasso_logistic(const Dataset& data, double lambda, const SolverOptions& opts) {
    return lasso_logistic(data, lambda, Vector::Zero(data.p()), opts);
}

FitResult lasso_logistic(const Dataset& data, double lambda, const Vector& beta_init,
                         const SolverOptions& opts) {
    data.validate();
    return irls_lasso(data, lambda, beta_init, opts, [](const Vector& a, const Vector& b) {
        return (a - b).cwiseAbs().maxCoeff();
    });
}

std::vector<FitResult> lasso_path(const Dataset& data, const std::vector<double>& lambdas,
                                  const SolverOptions& opts) {
    std::vector<FitResult> out;
    out.reserve(lambdas.size());
    Vector warm = Vector::Zero(data.p());
    for (double lam : lambdas) {
        out.push_back(lasso_logistic(data, lam, warm, opts));
        warm = out.back().beta;
    }
    return out;
}

double lambda_max(const Dataset& data) {
    data.validate(true);
    const Vector centered = data.y.array() - data.y.mean();
    return (data.X.transpose() * centered).cwiseAbs().maxCoeff() / static_cast<double>(data.n());
}

std::vector<double> lambda_grid(const Dataset& data, int n_lambda, double ratio) {
    if (n_lambda < 1) throw InvalidArgument("lambda grid needs at least one point");
    if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("lambda ratio must lie in (0, 1)");
    const double top = lambda_max(data);
    std::vector<double> grid(static_cast<std::size_t>(n_lambda));
    grid[0] = top;
    if (n_lambda == 1) return grid;
    const double log_ratio = std::log(ratio);
    for (int k = 1; k < n_lambda - 1; ++k) {
        grid[static_cast<std::size_t>(k)] =
            top * std::exp(log_ratio * static_cast<double>(k) / static_cast<double>(n_lambda - 1));
    }
    grid.back() = top * ratio;
    return grid;
}

std::vector<Eigen::Index> support(const Vector& beta) {
    std::vector<Eigen::Index> s;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        if (beta(j) != 0.0) s.push_back(j);
    }
    return s;
}

}  // namespace wlogit
