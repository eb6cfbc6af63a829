#include <benchmark/benchmark.h>

#include "semcom/link.hpp"

static void BM_PacketErrorProb(benchmark::State& state) {
    double gamma = 0.05;
    for (auto _ : state) {
        benchmark::DoNotOptimize(semcom::packet_error_prob(gamma, 1024, 0.4375));
        gamma = gamma < 4.0 ? gamma * 1.01 : 0.05;
    }
}
BENCHMARK(BM_PacketErrorProb);

static void BM_SampleLosses(benchmark::State& state) {
    const int b = static_cast<int>(state.range(0));
    semcom::LinkParams params{1024, 0.4375, 1.0, 1.0, b};
    const auto chan = semcom::draw_gains(semcom::ChannelModel::rayleigh, b, 7);
    std::vector<double> powers(b, 1.0);
    std::uint64_t key = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(semcom::sample_losses(chan, powers, params, key++));
    }
    state.SetItemsProcessed(state.iterations() * b);
}
BENCHMARK(BM_SampleLosses)->Arg(16)->Arg(64);

BENCHMARK_MAIN();
