#pragma once

#include <optional>

#include <Eigen/Dense>

namespace wlogit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. Symmetry is enforced on construction by averaging
/// the matrix with its transpose, so entries (i, j) and (j, i) are bitwise equal.
class SymMatrix {
public:
    explicit SymMatrix(const Matrix& m);

    static SymMatrix identity(Eigen::Index dim);
    static SymMatrix diagonal(const Vector& diag);

    Eigen::Index dim() const noexcept { return m_.rows(); }
    const Matrix& matrix() const noexcept { return m_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

private:
    Matrix m_;
};

/// Symmetric square root and inverse square root of a covariance estimate.
struct SqrtPair {
    SymMatrix sqrt;
    SymMatrix inv_sqrt;
    int floor_applied = 0;
};

/// Empirical covariance of the rows (divisor n - 1). Throws InsufficientSamples for n < 2.
SymMatrix sample_covariance(const Matrix& rows);

/// Result of linear shrinkage towards mu * I.
struct Shrinkage {
    SymMatrix sigma;
    double rho = 0.0;  ///< Shrinkage intensity in [0, 1].
    double mu = 0.0;   ///< trace(S) / p.
};

/// Linear shrinkage (1 - rho) S + rho mu I with mu = trace(S) / p.
///
/// When @p rho is not given it is estimated from S and the sample count with
/// the oracle-approximating variant of Ledoit-Wolf shrinkage, which needs no
/// access to the raw rows. The intensity is clamped to [0, 1].
Shrinkage shrink(const SymMatrix& s, Eigen::Index n, std::optional<double> rho = std::nullopt);

/// Convenience wrapper returning only the shrunk matrix.
SymMatrix shrink_covariance(const SymMatrix& s, Eigen::Index n,
                            std::optional<double> rho = std::nullopt);

/// S + loading * (trace(S) / p) * I.
SymMatrix diagonal_loading(const SymMatrix& s, double loading);

/// Default eigenvalue floor: 1e-6 times the largest eigenvalue (or 1e-12 if
/// the matrix has no positive eigenvalue).
double default_eig_floor(const SymMatrix& sigma);

/// Eigendecompose sigma = V diag(l) V^T, clamp l to at least eig_floor, and
/// return V diag(sqrt l) V^T with its inverse.
SqrtPair sym_sqrt_pair(const SymMatrix& sigma, double eig_floor);
SqrtPair sym_sqrt_pair(const SymMatrix& sigma);

Vector eigenvalues(const SymMatrix& sigma);
double min_eigenvalue(const SymMatrix& sigma);
bool is_positive_definite(const SymMatrix& sigma);

double max_abs(const Matrix& m);

}  // namespace wlogit
