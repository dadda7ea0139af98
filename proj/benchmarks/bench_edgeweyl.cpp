#include <benchmark/benchmark.h>

#include <numbers>
#include <random>

#include "edgeweyl/counting.hpp"
#include "edgeweyl/krein.hpp"
#include "edgeweyl/spectra.hpp"

using namespace edgeweyl;

static void BM_TorusEnumeration(benchmark::State& state) {
    const double lambda_max = static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(torus_spectrum(Eigen::MatrixXd::Identity(2, 2), lambda_max));
}
BENCHMARK(BM_TorusEnumeration)->Arg(10'000)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

static void BM_BallZeros(benchmark::State& state) {
    const double lambda_max = static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(ball3_spectrum(lambda_max));
}
BENCHMARK(BM_BallZeros)->Arg(10'000)->Arg(45'000)->Arg(250'000)->Unit(benchmark::kMillisecond);

static void BM_SmoothedCurve(benchmark::State& state) {
    const SpectralMeasure sm = torus_spectrum(Eigen::MatrixXd::Identity(2, 2), 1.1e5);
    const EncodedMeasure em = encode(sm, Affine{std::numbers::pi, 1.0});
    const auto grid = log_grid(1e3, 1e5, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(smoothed_curve(em, grid));
}
BENCHMARK(BM_SmoothedCurve)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_KreinRealization(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<double> ys;
    for (std::size_t i = 0; i < n; ++i) ys.push_back(0.1 * static_cast<double>((i + 1) * (i + 1)));
    const AtomicMeasurePlus mu(ys, std::vector<double>(n, 1.0));
    for (auto _ : state) benchmark::DoNotOptimize(jacobi_to_string(measure_to_jacobi(mu)));
}
BENCHMARK(BM_KreinRealization)->Arg(8)->Arg(16)->Arg(32);
BENCHMARK_MAIN();
