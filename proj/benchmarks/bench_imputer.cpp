#include <benchmark/benchmark.h>

#include "semcom/imputer.hpp"
#include "semcom/rng.hpp"

namespace {

struct Fixture {
    semcom::NoiseSchedule sched = semcom::NoiseSchedule::linear_subsampled(10);
    semcom::GaussianSourceSpec model;
    semcom::FeatureTensor y_hat;
    semcom::ErasureMask mask;

    Fixture(int n, bool ar1) {
        model.width = n;
        model.height = n;
        model.channels = 4;
        model.mean = 0.0;
        if (ar1)
            model.rho_corr = 0.9;
        else
            model.variance = 1.0;
        y_hat = semcom::FeatureTensor(n, n, 4);
        semcom::Rng rng(5);
        for (double& v : y_hat.values) v = rng.normal();
        semcom::ErasureReport rep;
        for (int i = 0; i < n / 2; ++i)
            for (int j = 0; j < n / 2; ++j)
                for (int c = 0; c < 4; ++c) rep.erased.push_back({i, j, c});
        mask = semcom::build_mask(rep, n, n, 4, 2);
    }
};

}  // namespace

static void BM_ImputeDiagonal(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)), false);
    const semcom::GaussianDenoiser den(f.model, f.sched);
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(semcom::impute(f.y_hat, f.mask, den, f.sched, seed++));
}
BENCHMARK(BM_ImputeDiagonal)->Arg(16)->Arg(64);

static void BM_ImputeAr1(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)), true);
    const semcom::GaussianDenoiser den(f.model, f.sched);
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(semcom::impute(f.y_hat, f.mask, den, f.sched, seed++));
}
BENCHMARK(BM_ImputeAr1)->Arg(16)->Arg(24);
