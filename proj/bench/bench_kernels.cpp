// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "pig/kernels/alpha_kernels.hpp"
#include "pig/kernels/gemm.hpp"
#include "pig/util/rng.hpp"

namespace {

using namespace pig;

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    Rng r(seed);
    std::vector<double> v(n);
    for (double& x : v) x = r.uniform(-1.0, 1.0);
    return v;
}

std::vector<double> beliefs(std::size_t count, std::size_t dim) {
    Rng r(3);
    std::vector<double> out;
    for (std::size_t i = 0; i < count; ++i) {
        auto b = sample_simplex(r, dim);
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

template <bool Parallel>
void BM_GemmNN(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    auto a = random_vec(n * n, 1), b = random_vec(n * n, 2);
    std::vector<double> c(n * n);
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::parallel::gemm_nn(a, b, c, n, n, n, false);
        else
            kernels::serial::gemm_nn(a, b, c, n, n, n, false);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

template <bool Parallel>
void BM_EvaluateMax(benchmark::State& state) {
    const std::size_t dim = 5;
    const auto count = static_cast<std::size_t>(state.range(0));
    auto alphas = random_vec(count * dim, 4);
    auto b = beliefs(1000, dim);
    std::vector<double> v(1000);
    std::vector<std::size_t> idx(1000);
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::parallel::evaluate_max(alphas, b, dim, v, idx);
        else
            kernels::serial::evaluate_max(alphas, b, dim, v, idx);
        benchmark::DoNotOptimize(v.data());
    }
}

template <bool Parallel>
void BM_PointBackup(benchmark::State& state) {
    const kernels::BackupDims dims{3, 3, static_cast<std::size_t>(state.range(0)), 5};
    auto base = random_vec(dims.actions * dims.dim, 5);
    auto proj = random_vec(dims.actions * dims.observations * dims.prev * dims.dim, 6);
    auto b = beliefs(1000, dims.dim);
    std::vector<kernels::BackupChoice> choices(1000);
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::parallel::point_backup(base, proj, dims, 0.95, b, choices);
        else
            kernels::serial::point_backup(base, proj, dims, 0.95, b, choices);
        benchmark::DoNotOptimize(choices.data());
    }
}

template <bool Parallel>
void BM_Dominance(benchmark::State& state) {
    const std::size_t dim = 5;
    const auto count = static_cast<std::size_t>(state.range(0));
    auto alphas = random_vec(count * dim, 7);
    std::vector<std::uint8_t> flags(count);
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::parallel::dominated_flags(alphas, dim, flags);
        else
            kernels::serial::dominated_flags(alphas, dim, flags);
        benchmark::DoNotOptimize(flags.data());
    }
}

} // namespace

BENCHMARK(BM_GemmNN<false>)->Arg(64)->Arg(256);
BENCHMARK(BM_GemmNN<true>)->Arg(64)->Arg(256);
BENCHMARK(BM_EvaluateMax<false>)->Arg(100)->Arg(2000);
BENCHMARK(BM_EvaluateMax<true>)->Arg(100)->Arg(2000);
BENCHMARK(BM_PointBackup<false>)->Arg(50)->Arg(500);
BENCHMARK(BM_PointBackup<true>)->Arg(50)->Arg(500);
BENCHMARK(BM_Dominance<false>)->Arg(1000)->Arg(4000);
BENCHMARK(BM_Dominance<true>)->Arg(1000)->Arg(4000);

BENCHMARK_MAIN();
