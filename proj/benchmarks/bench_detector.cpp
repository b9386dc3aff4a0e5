#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "wmlab/detector.hpp"

using namespace wmlab;
using wmlab::bench::fixture;
using wmlab::bench::make_oracle;

static void BM_CountGreen(benchmark::State& state) {
    const auto& f = fixture();
    const SchemeOracle oracle = make_oracle(static_cast<SchemeKind>(state.range(0)));
    Rng rng(3);
    const TaggedSeq doc = generate_watermarked(f.model, oracle, {}, 2000, rng);
    std::size_t tokens = 0;
    for (auto _ : state) {
        const auto [g, t] = count_green(doc.tokens, oracle);
        benchmark::DoNotOptimize(g);
        tokens += t;
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(tokens));
}
BENCHMARK(BM_CountGreen)
    ->Arg(static_cast<int>(SchemeKind::unigram))
    ->Arg(static_cast<int>(SchemeKind::kgw))
    ->Arg(static_cast<int>(SchemeKind::sir_like))
    ->Unit(benchmark::kMicrosecond);

static void BM_EwdScore(benchmark::State& state) {
    const auto& f = fixture();
    const SchemeOracle oracle = make_oracle(SchemeKind::unigram);
    Rng rng(4);
    const TaggedSeq doc = generate_watermarked(f.model, oracle, {}, 2000, rng);
    EntropyCache entropy(f.model);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ewd_score(doc.tokens, entropy, oracle, 0.5));
    }
}
BENCHMARK(BM_EwdScore)->Unit(benchmark::kMillisecond);

static void BM_Calibration(benchmark::State& state) {
    Rng rng(5);
    std::vector<double> null_scores(10000);
    for (auto& s : null_scores) s = rng.next_gaussian();
    for (auto _ : state) {
        benchmark::DoNotOptimize(calibrate_threshold(null_scores, 0.01).score_cutoff);
    }
}
BENCHMARK(BM_Calibration)->Unit(benchmark::kMicrosecond);
