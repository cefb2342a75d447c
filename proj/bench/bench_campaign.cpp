// Microbenchmarks: fused production kernel vs the Eigen reference kernel at
// several market sizes, and a Monte Carlo batch run serially vs on the OpenMP
// worker pool.

#include "dpnash/game.hpp"
#include "dpnash/graph.hpp"
#include "dpnash/rng.hpp"
#include "dpnash/seek.hpp"

#include <benchmark/benchmark.h>

#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace dpnash;

struct Fixture {
    std::vector<ProsumerParams> prosumers;
    MarketParams market;
    CommGraph graph;
    GameCoefficients coeffs;
    Eigen::MatrixXd y;

    explicit Fixture(int count) {
        std::mt19937_64 rng(count);
        std::uniform_real_distribution<double> c(0.005, 0.05), d(5.0, 30.0), y0(-50.0, 50.0);
        for (int i = 0; i < count; ++i) prosumers.push_back({c(rng), d(rng)});
        market = {100.0, count};
        graph = fully_connected(count, 0.8 / count);
        coeffs = derive_coefficients(prosumers, market);
        y.resize(count, count);
        for (int i = 0; i < count; ++i)
            for (int j = 0; j < count; ++j) y(i, j) = y0(rng);
    }
};

void BM_step_fused(benchmark::State& state) {
    Fixture fx(static_cast<int>(state.range(0)));
    Eigen::MatrixXd next(fx.y.rows(), fx.y.cols());
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            step_fused(fx.y, next, fx.coeffs, fx.graph, 0.05, fx.coeffs.beta));
        fx.y.swap(next);
    }
    state.SetItemsProcessed(state.iterations() * fx.y.size());
}

void BM_step_reference(benchmark::State& state) {
    Fixture fx(static_cast<int>(state.range(0)));
    Eigen::MatrixXd next(fx.y.rows(), fx.y.cols());
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            step_reference(fx.y, next, fx.coeffs, fx.graph, 0.05, fx.coeffs.beta));
        fx.y.swap(next);
    }
    state.SetItemsProcessed(state.iterations() * fx.y.size());
}

// A batch of independent private runs, the unit of work campaigns parallelize.
void run_batch(const Fixture& fx, int runs, bool parallel) {
    const SeekConfig sc{0.3, 1e-6, 20000, 20000, StepKernel::fused};
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (int run = 0; run < runs; ++run) {
        std::mt19937_64 rng(derive_seed(5, 0, static_cast<std::uint64_t>(run)));
        Eigen::VectorXd gamma(fx.market.count);
        for (int i = 0; i < fx.market.count; ++i) gamma(i) = 0.5 * unit_laplace(rng);
        const Trajectory traj = seek(fx.coeffs, fx.graph, sc, NoiseRealization{gamma, 0.5});
        benchmark::DoNotOptimize(traj.iterations);
    }
    (void)parallel;
}

void BM_batch_serial(benchmark::State& state) {
    Fixture fx(6);
    for (auto _ : state) run_batch(fx, static_cast<int>(state.range(0)), false);
}

void BM_batch_parallel(benchmark::State& state) {
    Fixture fx(6);
    for (auto _ : state) run_batch(fx, static_cast<int>(state.range(0)), true);
}

BENCHMARK(BM_step_fused)->Arg(6)->Arg(64)->Arg(256);
BENCHMARK(BM_step_reference)->Arg(6)->Arg(64)->Arg(256);
BENCHMARK(BM_batch_serial)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_batch_parallel)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
