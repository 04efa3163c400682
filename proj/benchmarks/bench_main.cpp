// Microbenchmarks for the hot paths: the per-spectrum coordinate-descent fit,
// the gamma ADMM solve, and one full alternating sweep worth of work.

#include <benchmark/benchmark.h>

#include <random>

#include "spectensor/kernel.hpp"
#include "spectensor/rank_one.hpp"
#include "spectensor/sparse_rep.hpp"

using namespace spectensor;

namespace {

Eigen::VectorXd random_spectrum(int nw, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return Eigen::VectorXd::NullaryExpr(nw, [&](Eigen::Index) { return unif(rng); });
}

}  // namespace

static void BM_SparseRepFit(benchmark::State& state) {
    int nw = int(state.range(0));
    SpectralGrid grid = SpectralGrid::uniform(954.0, 1700.0, nw);
    Eigen::MatrixXd K = kernel_matrix({KernelFamily::lorentzian, 15.0}, grid);
    SparseRepWorkspace ws(K, 0.01);
    Eigen::VectorXd X = random_spectrum(nw, 1);
    for (auto _ : state) {
        SparseRepFit fit = fit_sparse_rep(X, ws, {0.01, 0.01});
        benchmark::DoNotOptimize(fit.coeffs);
    }
}
BENCHMARK(BM_SparseRepFit)->Arg(64)->Arg(256)->Arg(544);

static void BM_GammaSolve(benchmark::State& state) {
    int nw = int(state.range(0));
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int n = 60;
    Eigen::MatrixXd U = Eigen::MatrixXd::NullaryExpr(
        n, nw, [&](Eigen::Index, Eigen::Index) { return gauss(rng); });
    Eigen::VectorXd y =
        Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return gauss(rng); });
    SpectralGrid grid = SpectralGrid::uniform(954.0, 954.0 + 10.0 * (nw - 1), nw);
    Eigen::MatrixXd gram = gram_matrix({KernelFamily::lorentzian, 15.0}, grid).entries;
    for (auto _ : state) {
        Eigen::VectorXd g =
            solve_gamma(U, y, 1e-2, 1e-2, gram, Eigen::VectorXd::Zero(nw));
        benchmark::DoNotOptimize(g);
    }
}
BENCHMARK(BM_GammaSolve)->Arg(10)->Arg(40);

static void BM_AlternatingFit(benchmark::State& state) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int n = 60, p = 5, d = 10, nw = 40;
    RankOneData data;
    data.xtilde = Tensor4(n, p, d, nw);
    for (double& v : data.xtilde.data()) v = unif(rng);
    SpectralGrid grid = SpectralGrid::uniform(954.0, 954.0 + 10.0 * (nw - 1), nw);
    data.gram = gram_matrix({KernelFamily::lorentzian, 15.0}, grid).entries;
    data.y = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return gauss(rng); });

    FitOptions opts;
    opts.max_outer = 10;
    for (auto _ : state) {
        auto [model, report] = fit_alternating(data, {1e-4, 1e-4, 1e-2, 1e-2}, opts);
        benchmark::DoNotOptimize(model.gamma);
    }
}
BENCHMARK(BM_AlternatingFit);

BENCHMARK_MAIN();
