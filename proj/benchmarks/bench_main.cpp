#include "combsep/pipeline.hpp"

#include <benchmark/benchmark.h>

namespace
{
const combsep::ExperimentConfig &defaults()
{
    static const auto cfg = combsep::ExperimentConfig::reference_defaults();
    return cfg;
}

combsep::CascadeSpec cascade()
{
    const auto &c = defaults();
    return {c.opo, c.rfc1, c.rfc2, c.comb};
}

// 1e6 points of the OPO comb; range(0) is the thread count.
void BM_SampleCombResponse(benchmark::State &state)
{
    const combsep::FrequencyGrid grid(0.0, 1e9, 1e3);
    for (auto _ : state) {
        auto trace = combsep::sample_comb_response(defaults().opo, grid, 0.0, static_cast<unsigned>(state.range(0)));
        benchmark::DoNotOptimize(trace.values.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size()));
}
BENCHMARK(BM_SampleCombResponse)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_LccOverlap(benchmark::State &state)
{
    const auto &c = defaults();
    const combsep::FrequencyGrid grid(0.0, 5e9, 1e3);
    const auto opo = combsep::sample_comb_response(c.opo, grid);
    const auto rfc = combsep::sample_comb_response(c.rfc1, grid);
    for (auto _ : state) {
        auto scores = combsep::lcc_overlap(opo, rfc, c.window, c.prominence_floor, 1);
        benchmark::DoNotOptimize(scores.data());
    }
}
BENCHMARK(BM_LccOverlap)->Unit(benchmark::kMillisecond);

void BM_Classify(benchmark::State &state)
{
    const auto spec = cascade();
    for (auto _ : state) {
        auto records = combsep::classify(spec);
        benchmark::DoNotOptimize(records.data());
    }
}
BENCHMARK(BM_Classify);

void BM_OptimizeFsr(benchmark::State &state)
{
    const auto spec = cascade();
    const auto &c = defaults();
    for (auto _ : state) {
        auto sweep = combsep::optimize_fsr(spec, *c.sweep, c.thresholds, static_cast<unsigned>(state.range(0)));
        benchmark::DoNotOptimize(sweep.best_count);
    }
}
BENCHMARK(BM_OptimizeFsr)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_ThresholdEntanglement(benchmark::State &state)
{
    for (auto _ : state)
        benchmark::DoNotOptimize(combsep::threshold_entanglement(20.0));
}
BENCHMARK(BM_ThresholdEntanglement);
} // namespace
BENCHMARK_MAIN();
