#include "wlogit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wlogit/error.hpp"

namespace wlogit {

SymMatrix::SymMatrix(const Matrix& m) {
    if (m.rows() != m.cols()) {
        std::ostringstream os;
        os << "symmetric matrix must be square, got " << m.rows() << "x" << m.cols();
        throw DimensionMismatch(os.str());
    }
    if (m.rows() < 1) throw InvalidArgument("symmetric matrix must have dim >= 1");
    if (!m.allFinite()) throw InvalidArgument("symmetric matrix has non-finite entries");
    m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index dim) {
    return SymMatrix(Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::diagonal(const Vector& diag) {
    return SymMatrix(Matrix(diag.asDiagonal()));
}

SymMatrix sample_covariance(const Matrix& rows) {
    const Eigen::Index n = rows.rows();
    if (n < 2) {
        throw InsufficientSamples("sample covariance needs at least 2 rows, got " +
                                  std::to_string(n));
    }
    if (rows.cols() < 1) throw InvalidArgument("sample covariance needs at least 1 column");
    const Eigen::RowVectorXd mean = rows.colwise().mean();
    const Matrix centered = rows.rowwise() - mean;
    Matrix s(centered.cols(), centered.cols());
    s.setZero();
    s.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
    s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
    s /= static_cast<double>(n - 1);
    return SymMatrix(s);
}

Shrinkage shrink(const SymMatrix& s, Eigen::Index n, std::optional<double> rho) {
    const Matrix& m = s.matrix();
    const double p = static_cast<double>(s.dim());
    const double tr = m.trace();
    const double tr2 = m.squaredNorm();  // trace(S^2) for symmetric S
    const double mu = tr / p;

    double r = 0.0;
    if (rho) {
        r = *rho;
    } else {
        const double nn = static_cast<double>(n);
        const double num = (1.0 - 2.0 / p) * tr2 + tr * tr;
        const double den = (nn + 1.0 - 2.0 / p) * (tr2 - tr * tr / p);
        r = den > 0.0 ? num / den : 1.0;
    }
    if (!std::isfinite(r)) r = 1.0;
    r = std::clamp(r, 0.0, 1.0);

    Matrix out = (1.0 - r) * m;
    out.diagonal().array() += r * mu;
    return Shrinkage{SymMatrix(out), r, mu};
}

SymMatrix shrink_covariance(const SymMatrix& s, Eigen::Index n, std::optional<double> rho) {
    return shrink(s, n, rho).sigma;
}

SymMatrix diagonal_loading(const SymMatrix& s, double loading) {
    if (!(loading >= 0.0)) throw InvalidArgument("diagonal loading must be >= 0");
    Matrix out = s.matrix();
    const double mu = out.trace() / static_cast<double>(s.dim());
    out.diagonal().array() += loading * mu;
    return SymMatrix(out);
}

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> decompose(const SymMatrix& sigma, bool vectors) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(
        sigma.matrix(), vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        const Matrix& m = sigma.matrix();
        std::ostringstream os;
        os << "symmetric eigendecomposition failed (dim=" << sigma.dim()
           << ", max|a_ij|=" << m.cwiseAbs().maxCoeff()
           << ", min diag=" << m.diagonal().minCoeff()
           << ", max diag=" << m.diagonal().maxCoeff() << ")";
        throw NumericalError(os.str());
    }
    return es;
}

}  // namespace

double default_eig_floor(const SymMatrix& sigma) {
    const double top = eigenvalues(sigma).maxCoeff();
    return top > 0.0 ? 1e-6 * top : 1e-12;
}

SqrtPair sym_sqrt_pair(const SymMatrix& sigma, double eig_floor) {
    if (!(eig_floor > 0.0)) throw InvalidArgument("eigenvalue floor must be positive");
    const auto es = decompose(sigma, true);
    Vector lambda = es.eigenvalues();
    int clamped = 0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) < eig_floor) {
            lambda(i) = eig_floor;
            ++clamped;
        }
    }
    const Matrix& v = es.eigenvectors();
    const Vector root = lambda.array().sqrt();
    const Matrix sqrt_m = v * root.asDiagonal() * v.transpose();
    const Matrix inv_m = v * root.cwiseInverse().asDiagonal() * v.transpose();
    return SqrtPair{SymMatrix(sqrt_m), SymMatrix(inv_m), clamped};
}

SqrtPair sym_sqrt_pair(const SymMatrix& sigma) {
    return sym_sqrt_pair(sigma, default_eig_floor(sigma));
}

Vector eigenvalues(const SymMatrix& sigma) { return decompose(sigma, false).eigenvalues(); }

double min_eigenvalue(const SymMatrix& sigma) { return eigenvalues(sigma).minCoeff(); }

bool is_positive_definite(const SymMatrix& sigma) {
    Eigen::LLT<Matrix> llt(sigma.matrix());
    return llt.info() == Eigen::Success;
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace wlogit
