#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "wlogit/diagnostics.hpp"
#include "wlogit/error.hpp"
#include "wlogit/pipeline.hpp"
#include "wlogit/simbench.hpp"

using namespace wlogit;
using wlogit::testing::gaussian_matrix;
using wlogit::testing::gaussian_vector;

namespace {

double pair_count_auc(const Vector& s, const Vector& y) {
    double num = 0, den = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (y(i) != 1.0) continue;
        for (Eigen::Index j = 0; j < s.size(); ++j) {
            if (y(j) != 0.0) continue;
            den += 1;
            num += s(i) > s(j) ? 1.0 : (s(i) == s(j) ? 0.5 : 0.0);
        }
    }
    return num / den;
}

}  // namespace

TEST(Auc, Examples) {
    EXPECT_DOUBLE_EQ(auc(Eigen::Vector4d(0.9, 0.8, 0.3, 0.2), Eigen::Vector4d(1, 0, 1, 0)), 0.75);
    EXPECT_DOUBLE_EQ(auc(Eigen::Vector4d(4, 3, 2, 1), Eigen::Vector4d(1, 1, 0, 0)), 1.0);
    EXPECT_DOUBLE_EQ(auc(Vector::Constant(6, 0.3), Eigen::Matrix<double, 6, 1>(1, 0, 1, 0, 0, 1)), 0.5);
}

TEST(Auc, ErrorsOnBadInput) {
    EXPECT_THROW(auc(Vector::Ones(3), Vector::Ones(3)), DataError);
    EXPECT_THROW(auc(Vector::Ones(3), Vector::Ones(2)), DimensionMismatch);
    EXPECT_THROW(auc(Vector::Ones(2), Eigen::Vector2d(1, 2)), DataError);
}

TEST(Auc, MatchesExhaustivePairsWithTies) {
    Rng rng(1);
    for (int rep = 0; rep < 50; ++rep) {
        const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.below(40));
        Vector s(n), y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            s(i) = static_cast<double>(rng.below(6));  // coarse grid forces ties
            y(i) = i == 0 ? 1.0 : (i == 1 ? 0.0 : static_cast<double>(rng.below(2)));
        }
        EXPECT_EQ(auc(s, y), pair_count_auc(s, y));
    }
}

TEST(RocCurve, EndpointsAndTieSteps) {
    const auto pts = roc_curve(Eigen::Vector4d(0.9, 0.5, 0.5, 0.1), Eigen::Vector4d(1, 1, 0, 0));
    ASSERT_EQ(pts.size(), 4u);
    EXPECT_EQ(pts.front().fpr, 0.0);
    EXPECT_EQ(pts.front().tpr, 0.0);
    EXPECT_EQ(pts[1].tpr, 0.5);
    EXPECT_EQ(pts[2].fpr, 0.5);
    EXPECT_EQ(pts[2].tpr, 1.0);
    EXPECT_EQ(pts.back().fpr, 1.0);
}

TEST(SelectionMetrics, Examples) {
    std::vector<Eigen::Index> truth(10);
    for (int j = 0; j < 10; ++j) truth[static_cast<std::size_t>(j)] = j;
    auto r = selection_metrics(truth, truth, 20);
    EXPECT_EQ(r.tpr, 1.0);
    EXPECT_EQ(r.fpr, 0.0);
    r = selection_metrics({0, 1, 10}, truth, 20);
    EXPECT_DOUBLE_EQ(r.tpr, 0.2);
    EXPECT_DOUBLE_EQ(r.fpr, 0.1);
    r = selection_metrics({}, truth, 20);
    EXPECT_EQ(r.tpr, 0.0);
    EXPECT_EQ(r.fpr, 0.0);
    EXPECT_THROW(selection_metrics({1}, {}, 5), InvalidArgument);
    EXPECT_THROW(selection_metrics({7}, {1}, 5), InvalidArgument);
}

TEST(IcViolation, OrthogonalBlocksGiveZero) {
    Matrix x = Matrix::Zero(4, 3);
    x(0, 0) = 1;
    x(1, 1) = 1;
    x(2, 2) = 1;
    x(3, 0) = 1;
    const ICReport r = ic_violation(x, Vector::Ones(4), {0, 1});
    EXPECT_EQ(r.violation_fraction, 0.0);
    EXPECT_EQ(r.max_row_sum, 0.0);
}

TEST(IcViolation, ThreeFeatureHandOracle) {
    Rng rng(2);
    const Matrix x = gaussian_matrix(8, 3, rng);
    Vector h(8);
    for (Eigen::Index i = 0; i < 8; ++i) h(i) = 0.1 + rng.uniform();
    // Q entries by explicit sums, then a 2x2 inverse via the adjugate.
    double q[3][3] = {};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (Eigen::Index i = 0; i < 8; ++i) q[a][b] += x(i, a) * h(i) * x(i, b);
    // active = {0, 2}, inactive = {1}
    const double det = q[0][0] * q[2][2] - q[0][2] * q[2][0];
    const double inv00 = q[2][2] / det, inv02 = -q[0][2] / det, inv22 = q[0][0] / det;
    const double a0 = q[1][0] * inv00 + q[1][2] * inv02;
    const double a2 = q[1][0] * inv02 + q[1][2] * inv22;
    const double row = std::abs(a0) + std::abs(a2);

    const ICReport r = ic_violation(x, h, {2, 0});
    EXPECT_NEAR(r.max_row_sum, row, 1e-10);
    EXPECT_EQ(r.violation_fraction, row >= 1.0 ? 1.0 : 0.0);
    EXPECT_EQ(r.d, 2);
    EXPECT_EQ(r.active, (std::vector<Eigen::Index>{0, 2}));

    const ICReport e = ic_violation(x, h, {0, 2}, ViolationUnit::entries);
    EXPECT_DOUBLE_EQ(e.violation_fraction,
                     ((std::abs(a0) >= 1.0) + (std::abs(a2) >= 1.0)) / 2.0);
}

TEST(IcViolation, StrongCorrelationViolates) {
    Rng rng(3);
    const Eigen::Index n = 200;
    Matrix x(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
        x(i, 2) = 0.8 * (x(i, 0) + x(i, 1)) + 0.1 * rng.normal();
    }
    EXPECT_EQ(ic_violation(x, Vector::Ones(n), {0, 1}).violation_fraction, 1.0);
}

TEST(IcViolation, Errors) {
    const Matrix x = Matrix::Identity(3, 3);
    EXPECT_THROW(ic_violation(x, Vector::Ones(3), {}), InvalidArgument);
    EXPECT_THROW(ic_violation(x, Vector::Ones(3), {0, 1, 2}), InvalidArgument);
    EXPECT_THROW(ic_violation(x, Vector::Ones(3), {0, 0}), InvalidArgument);
    EXPECT_THROW(ic_violation(x, Vector::Ones(2), {0}), DimensionMismatch);
    Matrix dup(3, 3);
    dup << 1, 1, 0, 2, 2, 1, 3, 3, 0;
    // Exactly collinear active columns: rescued by the jitter...
    EXPECT_TRUE(ic_violation(dup, Vector::Ones(3), {0, 1}).jittered);
    // ...unless Q_SS is so large that the jitter is below rounding.
    dup.leftCols(2) *= 1e5;
    EXPECT_THROW(ic_violation(dup, Vector::Ones(3), {0, 1}), NumericalError);
}

TEST(WhiteningGap, ScalarAndExactCases) {
    Matrix x(3, 1);
    x << 1, 2, -1;
    const Vector h = Eigen::Vector3d(0.5, 0.25, 1.0);
    EXPECT_DOUBLE_EQ(whitening_gap(x, h), std::abs((0.5 + 1.0 + 1.0) / 3.0 - 1.0));
    Matrix e = Matrix::Identity(2, 2) * std::sqrt(2.0);
    EXPECT_NEAR(whitening_gap(e, Vector::Ones(2)), 0.0, 1e-15);
}

TEST(WhiteningGap, DecreasesOnBlockwiseData) {
    int better = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const SymMatrix sigma = make_sigma(40, 5, {SigmaKind::blockwise, 0.3, 0.5, 0.7});
        Vector beta = Vector::Zero(40);
        beta.head(5).setOnes();
        const Dataset d = gen_dataset(sigma, beta, 100, Balance::balanced(), 500 + s);
        const Dataset ds{Standardization::fit(d.X).apply(d.X), d.y};
        const WhiteningTransform t = build_whitening(ds);
        if (whitening_gap(whiten(ds.X, t), t.h_diag) < whitening_gap(ds.X, t.h_diag)) ++better;
    }
    EXPECT_EQ(better, 20);
}
