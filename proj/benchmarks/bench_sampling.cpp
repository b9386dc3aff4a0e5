#include <benchmark/benchmark.h>

#include "bench_common.hpp"

using namespace wmlab;
using wmlab::bench::fixture;
using wmlab::bench::make_oracle;

static void BM_BaseSampling(benchmark::State& state) {
    const auto& f = fixture();
    Rng rng(1);
    std::size_t tokens = 0;
    for (auto _ : state) {
        const TokenSeq out = generate_text(f.model, {f.prompts[0].ids.data(), 50}, 512, rng);
        benchmark::DoNotOptimize(out.ids.data());
        tokens += out.ids.size();
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(tokens));
}
BENCHMARK(BM_BaseSampling)->Unit(benchmark::kMillisecond);

static void BM_WatermarkedSampling(benchmark::State& state) {
    const auto& f = fixture();
    const SchemeOracle oracle = make_oracle(static_cast<SchemeKind>(state.range(0)));
    Rng rng(2);
    std::size_t tokens = 0;
    for (auto _ : state) {
        const TaggedSeq out =
            generate_watermarked(f.model, oracle, {f.prompts[1].ids.data(), 50}, 512, rng);
        benchmark::DoNotOptimize(out.tokens.ids.data());
        tokens += out.tokens.ids.size();
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(tokens));
}
BENCHMARK(BM_WatermarkedSampling)
    ->Arg(static_cast<int>(SchemeKind::unigram))
    ->Arg(static_cast<int>(SchemeKind::kgw))
    ->Arg(static_cast<int>(SchemeKind::sir_like))
    ->Arg(static_cast<int>(SchemeKind::atw_like))
    ->Unit(benchmark::kMillisecond);

static void BM_DenseDistribution(benchmark::State& state) {
    const auto& f = fixture();
    const auto& ctx = f.prompts[2].ids;
    for (auto _ : state) {
        const auto probs = f.model.next_token_distribution({ctx.data(), 2});
        benchmark::DoNotOptimize(probs.data());
    }
}
BENCHMARK(BM_DenseDistribution)->Unit(benchmark::kMicrosecond);

static void BM_TrainTrigram(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) {
        const auto model =
            NGramModel::train(f.train, 3, 0.1, f.vocab.size(), f.vocab.content_hash());
        benchmark::DoNotOptimize(model.vocab_size());
    }
}
BENCHMARK(BM_TrainTrigram)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
