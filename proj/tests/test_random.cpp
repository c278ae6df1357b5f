#include <gtest/gtest.h>

#include <cmath>

#include "wlogit/error.hpp"
#include "wlogit/linalg.hpp"
#include "wlogit/random.hpp"

using namespace wlogit;

TEST(SplitMix64, ReferenceOutput) {
    // First outputs of the reference generator from state 0.
    std::uint64_t state = 0;
    EXPECT_EQ(splitmix64(state), 0xE220A8397B1DCDAFull);
    EXPECT_EQ(splitmix64(state), 0x6E789E6AA1B965F4ull);
}

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        differs |= x != c.next_u64();
    }
    EXPECT_TRUE(differs);
}

TEST(Rng, UniformAndBelowStayInRange) {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        ASSERT_LT(rng.below(7), 7u);
    }
}

TEST(Rng, NormalMoments) {
    Rng rng(8);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(MvNormal, IdentityCovarianceLargeSample) {
    const Matrix x = mv_normal_sample(SymMatrix::identity(2), 10000, 1);
    EXPECT_LE(max_abs(sample_covariance(x).matrix() - Matrix::Identity(2, 2)), 0.1);
}

TEST(MvNormal, CorrelatedPair) {
    Matrix m(2, 2);
    m << 1, 0.9, 0.9, 1;
    const SymMatrix s = sample_covariance(mv_normal_sample(SymMatrix(m), 10000, 2));
    const double r = s(0, 1) / std::sqrt(s(0, 0) * s(1, 1));
    EXPECT_GE(r, 0.85);
    EXPECT_LE(r, 0.95);
}

TEST(MvNormal, SeedIsBitReproducible) {
    Matrix m(3, 3);
    m << 2, 0.5, 0.1, 0.5, 1, 0.3, 0.1, 0.3, 1.5;
    const Matrix a = mv_normal_sample(SymMatrix(m), 20, 99);
    const Matrix b = mv_normal_sample(SymMatrix(m), 20, 99);
    EXPECT_TRUE((a.array() == b.array()).all());
    EXPECT_FALSE((a.array() == mv_normal_sample(SymMatrix(m), 20, 100).array()).all());
}

TEST(MvNormal, RejectsIndefinite) {
    Matrix m(2, 2);
    m << 1, 2, 2, 1;
    EXPECT_THROW(MvNormal{SymMatrix(m)}, NotPositiveDefinite);
}
