// Microbenchmarks for the hot paths: table materialization, exact and
// sampled stability, power indices, and neighborhood dilation.

#include "stabvote/electoral.hpp"
#include "stabvote/geometry.hpp"
#include "stabvote/hypercube.hpp"
#include "stabvote/multicand.hpp"
#include "stabvote/noise.hpp"
#include "stabvote/power.hpp"

#include <benchmark/benchmark.h>

using namespace stabvote;

static void BM_MaterializeMajority(benchmark::State& state) {
    const int n = int(state.range(0));
    for (auto _ : state) {
        Method m = make_method(MethodSpec{Majority{}}, n);
        benchmark::DoNotOptimize(m.table());
    }
    state.SetItemsProcessed(state.iterations() * (std::int64_t(1) << n));
}
BENCHMARK(BM_MaterializeMajority)->Arg(12)->Arg(16)->Arg(20);

static void BM_StabilityWht(benchmark::State& state) {
    const int n = int(state.range(0));
    Method m = make_method(equal_two_tier(n / 3, 3), n);
    for (auto _ : state)
        benchmark::DoNotOptimize(stability_wht(m, 0.7));
    state.SetItemsProcessed(state.iterations() * (std::int64_t(1) << n));
}
BENCHMARK(BM_StabilityWht)->Arg(12)->Arg(15)->Arg(18);

static void BM_StabilityExactDense(benchmark::State& state) {
    const int n = int(state.range(0));
    Method m = make_method(MethodSpec{Majority{}}, n);
    CorruptionModel model{0.7, {}};
    for (auto _ : state)
        benchmark::DoNotOptimize(stability_exact(m, model).value);
    state.SetItemsProcessed(state.iterations() * (std::int64_t(1) << n));
}
BENCHMARK(BM_StabilityExactDense)->Arg(10)->Arg(14)->Arg(18);

static void BM_StabilityMcCountRoute(benchmark::State& state) {
    Method m = make_method(MethodSpec{Majority{}}, 10001);
    CorruptionModel model{0.6, {}};
    const std::uint64_t samples = std::uint64_t(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(stability_mc(m, model, samples, 1, 1).value);
    state.SetItemsProcessed(state.iterations() * std::int64_t(samples));
}
BENCHMARK(BM_StabilityMcCountRoute)->Arg(1 << 14)->Arg(1 << 17);

static void BM_BanzhafIndices(benchmark::State& state) {
    Method m = make_method(MethodSpec{UNCouncil{UNEra::Post1965}}, 15);
    for (auto _ : state)
        benchmark::DoNotOptimize(banzhaf_indices(m));
}
BENCHMARK(BM_BanzhafIndices);

static void BM_Neighborhood(benchmark::State& state) {
    const int n = int(state.range(0));
    Method m = make_method(MethodSpec{Majority{}}, n);
    SubsetMask s = mask_from_function(*m.table(), +1);
    for (auto _ : state)
        benchmark::DoNotOptimize(neighborhood(s, 1).count());
    state.SetItemsProcessed(state.iterations() * (std::int64_t(1) << n));
}
BENCHMARK(BM_Neighborhood)->Arg(14)->Arg(18)->Arg(20);

static void BM_VulnerableCount(benchmark::State& state) {
    const int n = int(state.range(0));
    Method m = make_method(MethodSpec{Majority{}}, n);
    for (auto _ : state)
        benchmark::DoNotOptimize(vulnerable_count(m, 2).total);
    state.SetItemsProcessed(state.iterations() * (std::int64_t(1) << n));
}
BENCHMARK(BM_VulnerableCount)->Arg(12)->Arg(16);

static void BM_StabilityKExact(benchmark::State& state) {
    MultiFunction f = MultiFunction::plurality_fn(int(state.range(0)), 3);
    for (auto _ : state)
        benchmark::DoNotOptimize(stability_k_exact(f, 0.7).value);
}
BENCHMARK(BM_StabilityKExact)->Arg(6)->Arg(9);

static void BM_EcFlipProb(benchmark::State& state) {
    EcScenario sc;
    for (int s = 0; s < 51; ++s)
        sc.states.push_back({"S" + std::to_string(s + 1), 1001, 1});
    sc.epsilon = 1e-3;
    sc.samples = std::uint64_t(state.range(0));
    sc.seed = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(flip_prob_mc(EcMethod::ElectoralCollege, sc, 1).value);
    state.SetItemsProcessed(state.iterations() * std::int64_t(sc.samples));
}
BENCHMARK(BM_EcFlipProb)->Arg(1 << 14);

BENCHMARK_MAIN();
