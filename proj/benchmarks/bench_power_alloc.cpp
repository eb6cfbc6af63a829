#include <benchmark/benchmark.h>

#include "semcom/power_alloc.hpp"
#include "semcom/rng.hpp"

namespace {

semcom::AllocationProblem make_problem(int b, std::uint64_t seed) {
    semcom::Rng rng(seed);
    semcom::AllocationProblem p;
    p.weights.resize(b);
    p.gains.resize(b);
    for (int i = 0; i < b; ++i) {
        p.weights[i] = 0.05 + rng.uniform();
        p.gains[i] = rng.exponential();
    }
    p.avg_power = 1.0;
    p.blocklength = 1024;
    p.channel_rate = 0.4375;
    return p;
}

}  // namespace

static void BM_SemanticPA(benchmark::State& state) {
    const int b = static_cast<int>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        const auto p = make_problem(b, seed++);
        benchmark::DoNotOptimize(semcom::solve_semantic_pa(p));
    }
}
BENCHMARK(BM_SemanticPA)->Arg(4)->Arg(16)->Arg(64);

static void BM_Waterfill(benchmark::State& state) {
    const int b = static_cast<int>(state.range(0));
    const auto p = make_problem(b, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(semcom::waterfill(p.gains, 1.0, b));
    }
}
BENCHMARK(BM_Waterfill)->Arg(16)->Arg(64);
