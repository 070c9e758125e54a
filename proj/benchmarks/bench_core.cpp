#include <benchmark/benchmark.h>

#include "monoflow/analysis.hpp"
#include "monoflow/examples.hpp"
#include "monoflow/integrator.hpp"
#include "monoflow/rng.hpp"

using namespace monoflow;

static void BM_PhiloxNormalDraw(benchmark::State& state) {
    std::uint64_t index = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(normal_draw(42, Stream::generic, 0, index++));
    }
}
BENCHMARK(BM_PhiloxNormalDraw);

static void BM_EulerStepGbm(benchmark::State& state) {
    const CoefficientField field = lookup("gbm").field;
    const TimeGrid grid{0.0, 1.0, 1024};
    const NoiseRealization noise = sample_noise(grid, 1, 42, 0);
    EulerStepper stepper(field, grid, kDefaultRMax);
    Vec x = {1.0};
    BlowUp bu;
    int k = 0;
    for (auto _ : state) {
        if (!stepper.step(x, k, noise, bu) || ++k == grid.n_steps) {
            k = 0;
            x = {1.0};
        }
        benchmark::DoNotOptimize(x[0]);
    }
}
BENCHMARK(BM_EulerStepGbm);

static void BM_StructureMatrixOpnorm(benchmark::State& state) {
    const CoefficientField field = lookup("trig_diffusion").field;
    const Vec x = {0.3, -1.1}, y = {0.7, 0.4};
    for (auto _ : state) {
        const auto [tr, op] = trace_and_opnorm(structure_matrix(field, x, y));
        benchmark::DoNotOptimize(tr + op);
    }
}
BENCHMARK(BM_StructureMatrixOpnorm);

static void BM_NoiseRealization(benchmark::State& state) {
    const TimeGrid grid{0.0, 1.0, static_cast<int>(state.range(0))};
    std::uint64_t replica = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_noise(grid, 2, 42, replica++).increments.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NoiseRealization)->Range(256, 4096)->Complexity();

BENCHMARK_MAIN();
