#include <benchmark/benchmark.h>

#include "qelogit/dgp.hpp"
#include "qelogit/estimators.hpp"
#include "qelogit/quadexp.hpp"

namespace {

using namespace qelogit;

DesignSpec bench_spec(int n, int T) {
    DesignSpec spec;
    spec.family = DesignFamily::Benchmark;
    spec.n = n;
    spec.T = T;
    spec.gamma = 0.5;
    spec.beta = 1.0;
    spec.seed = 20240211;
    spec.replications = 1;
    return spec;
}

void BM_CondLogprob(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    const PanelDataset ds = generate(bench_spec(64, T), 0);
    const Theta th = true_theta(bench_spec(64, T));
    std::size_t i = 0;
    for (auto _ : state) {
        const PanelUnit& u = ds.units[i++ % ds.n()];
        if (!u.informative()) continue;
        benchmark::DoNotOptimize(cond_logprob_basic(u, th));
    }
}
BENCHMARK(BM_CondLogprob)->Arg(3)->Arg(7)->Arg(12)->Arg(16);

void BM_ScoreInfo(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    const PanelDataset ds = generate(bench_spec(64, T), 0);
    const Theta th = true_theta(bench_spec(64, T));
    std::size_t i = 0;
    for (auto _ : state) {
        const PanelUnit& u = ds.units[i++ % ds.n()];
        benchmark::DoNotOptimize(unit_score_and_info(u, th, KernelVariant::basic()));
    }
}
BENCHMARK(BM_ScoreInfo)->Arg(3)->Arg(7)->Arg(12);

void BM_Generate(benchmark::State& state) {
    const DesignSpec spec = bench_spec(static_cast<int>(state.range(0)), 3);
    int rep = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(generate(spec, rep++));
    }
}
BENCHMARK(BM_Generate)->Arg(250)->Arg(1000);

void BM_FitImproved(benchmark::State& state) {
    const DesignSpec spec = bench_spec(static_cast<int>(state.range(0)), 3);
    const PanelDataset ds = generate(spec, 0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_improved(ds));
    }
}
BENCHMARK(BM_FitImproved)->Arg(250)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
