#include <benchmark/benchmark.h>

#include "wlogit/diagnostics.hpp"
#include "wlogit/glm.hpp"
#include "wlogit/pipeline.hpp"
#include "wlogit/simbench.hpp"

using namespace wlogit;

namespace {

Dataset blockwise(Eigen::Index p, std::uint64_t seed) {
    const SymMatrix sigma = make_sigma(p, 10, {SigmaKind::blockwise, 0.3, 0.5, 0.7});
    Vector beta = Vector::Zero(p);
    beta.head(10).setOnes();
    Dataset d = gen_dataset(sigma, beta, 100, Balance::balanced(), seed);
    d.X = Standardization::fit(d.X).apply(d.X);
    return d;
}

void BM_WeightedLassoCd(benchmark::State& state) {
    const Dataset d = blockwise(state.range(0), 1);
    const IrlsState st = irls_quantities(d, Vector::Zero(d.p()));
    const Vector sw = st.w.array().sqrt();
    const Matrix xw = sw.asDiagonal() * d.X;
    const Vector zw = sw.cwiseProduct(st.z);
    const double lam = 0.1 * (xw.transpose() * zw).cwiseAbs().maxCoeff() / static_cast<double>(d.n());
    for (auto _ : state) {
        benchmark::DoNotOptimize(weighted_lasso_cd(xw, zw, lam, Vector::Zero(d.p())));
    }
}
BENCHMARK(BM_WeightedLassoCd)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_LassoPath(benchmark::State& state) {
    const Dataset d = blockwise(state.range(0), 2);
    const auto grid = lambda_grid(d, 30, 0.01);
    for (auto _ : state) benchmark::DoNotOptimize(lasso_path(d, grid));
}
BENCHMARK(BM_LassoPath)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_SymSqrtPair(benchmark::State& state) {
    const Dataset d = blockwise(state.range(0), 3);
    const SymMatrix s = shrink_covariance(sample_covariance(d.X), d.n());
    for (auto _ : state) benchmark::DoNotOptimize(sym_sqrt_pair(s));
}
BENCHMARK(BM_SymSqrtPair)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_BuildWhitening(benchmark::State& state) {
    const Dataset d = blockwise(state.range(0), 4);
    for (auto _ : state) benchmark::DoNotOptimize(build_whitening(d));
}
BENCHMARK(BM_BuildWhitening)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_Fit(benchmark::State& state) {
    const Dataset d = blockwise(state.range(0), 5);
    for (auto _ : state) benchmark::DoNotOptimize(fit(d));
}
BENCHMARK(BM_Fit)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Auc(benchmark::State& state) {
    Rng rng(6);
    const auto n = state.range(0);
    Vector s(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        s(i) = rng.normal();
        y(i) = static_cast<double>(i % 2);
    }
    for (auto _ : state) benchmark::DoNotOptimize(auc(s, y));
}
BENCHMARK(BM_Auc)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
