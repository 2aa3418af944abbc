#include "hallsand/dynamics.hpp"
#include "hallsand/experiments.hpp"
#include "hallsand/exposure.hpp"
#include "hallsand/ingest.hpp"
#include "hallsand/operators.hpp"

#include <benchmark/benchmark.h>

#include <map>

using namespace hallsand;

namespace {

const IOTable& table_of(std::size_t n) {
    static std::map<std::size_t, IOTable> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, synth_substrate(n, 0.1, 7)).first;
    return it->second;
}

}  // namespace

static void BM_SpectralRadius(benchmark::State& state) {
    const auto op = build_operator(table_of(static_cast<std::size_t>(state.range(0))), OperatorKind::LeakageAdjusted);
    for (auto _ : state) benchmark::DoNotOptimize(spectral_radius(op.matrix));
}
BENCHMARK(BM_SpectralRadius)->Arg(200)->Arg(500)->Arg(2000)->Unit(benchmark::kMicrosecond);

static void BM_Exposure(benchmark::State& state) {
    const auto& t = table_of(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(compute_exposure(t));
}
BENCHMARK(BM_Exposure)->Arg(500)->Arg(2000)->Unit(benchmark::kMicrosecond);

// One period (draws, update, relaxation) in the avalanche regime.
static void BM_EngineStep(benchmark::State& state) {
    const auto sub = make_substrate(table_of(static_cast<std::size_t>(state.range(0))));
    Engine engine(sub.op, sub.exposure, Params{}, 2.3, 1);
    const auto field = FieldModel::with_default_noise(1.35);
    for (int k = 0; k < 50; ++k) engine.step(field);
    for (auto _ : state) benchmark::DoNotOptimize(engine.step(field).S);
}
BENCHMARK(BM_EngineStep)->Arg(200)->Arg(500)->Arg(2000)->Unit(benchmark::kMicrosecond);

static void BM_Scenario(benchmark::State& state) {
    const auto sub = make_substrate(table_of(200));
    ScenarioSpec spec;
    spec.name = "bench";
    spec.B_bar = 1.0;
    spec.sigma_D = 1.8;
    spec.replications = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_scenario(spec, sub, Params{}).stats.mean_S);
}
BENCHMARK(BM_Scenario)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
