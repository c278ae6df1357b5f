#pragma once

#include <array>
#include <cstdint>

#include "wlogit/linalg.hpp"

namespace wlogit {

/// xoshiro256** 1.0 (Blackman & Vigna), state seeded from a 64-bit value by
/// four SplitMix64 steps. Gaussian variates use the basic Box-Muller
/// transform on 53-bit uniforms, consuming two uniforms per pair and caching
/// the sine branch. Both choices are fixed so that a seed reproduces the same
/// stream on every platform with an IEEE-754 libm.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    /// Standard normal variate.
    double normal();
    bool bernoulli(double p);
    /// Uniform integer on [0, bound) by rejection; bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

private:
    std::array<std::uint64_t, 4> s_{};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Sampler for N(0, sigma) that keeps the lower Cholesky factor.
class MvNormal {
public:
    /// Throws NotPositiveDefinite if the Cholesky factorization fails.
    explicit MvNormal(const SymMatrix& sigma);

    Eigen::Index dim() const noexcept { return lower_.rows(); }

    /// n draws as rows. Standard normals are consumed row by row.
    Matrix sample(Eigen::Index n, Rng& rng) const;

private:
    Matrix lower_;
};

/// n independent N(0, sigma) rows, deterministic in @p seed.
Matrix mv_normal_sample(const SymMatrix& sigma, Eigen::Index n, std::uint64_t seed);

}  // namespace wlogit
