#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "wmlab/attack.hpp"
#include "wmlab/estimator.hpp"

using namespace wmlab;
using wmlab::bench::fixture;
using wmlab::bench::make_oracle;

static void BM_EstimateGreenList(benchmark::State& state) {
    const auto& f = fixture();
    const SchemeOracle oracle = make_oracle(SchemeKind::unigram);
    Rng rng(6);
    std::vector<TokenSeq> wm_docs;
    for (int d = 0; d < 100; ++d) {
        wm_docs.push_back(generate_watermarked(f.model, oracle, {}, 500, rng).tokens);
    }
    const auto wtm = token_frequencies(wm_docs, f.vocab.size());
    const auto base = token_frequencies(f.train, f.vocab.size());
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_green_list(wtm, base, 1e-6).predicted.green_count());
    }
}
BENCHMARK(BM_EstimateGreenList)->Unit(benchmark::kMicrosecond);

static void BM_Paraphrase(benchmark::State& state) {
    const auto& f = fixture();
    const SchemeOracle oracle = make_oracle(SchemeKind::unigram);
    Rng gen_rng(7);
    const TaggedSeq doc = generate_watermarked(f.model, oracle, {}, 512, gen_rng);
    const auto base = token_frequencies(f.train, f.vocab.size());
    const auto stopwords = stopword_flags(base, 50);

    AttackConfig cfg;
    cfg.diversity = 0.6;
    cfg.bias_delta = 4.0;
    cfg.fidelity = 4.0;
    cfg.paraphraser = &f.model;
    cfg.stopwords = &stopwords;
    cfg.estimated_mask = &oracle.fixed_mask();

    Rng rng(8);
    std::size_t tokens = 0;
    for (auto _ : state) {
        const TokenSeq out = paraphrase(doc.tokens, cfg, rng);
        benchmark::DoNotOptimize(out.ids.data());
        tokens += out.ids.size();
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(tokens));
}
BENCHMARK(BM_Paraphrase)->Unit(benchmark::kMillisecond);
