#include <stdexcept>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "fixtures.hpp"
#include "wmlab/watermark.hpp"

using namespace wmlab;

namespace {

SchemeSpec make_spec(SchemeKind kind, double gamma = 0.5, double delta = 2.0,
                     std::uint64_t seed = 1) {
    SchemeSpec spec;
    spec.kind = kind;
    spec.params = {gamma, delta, seed};
    return spec;
}

}  // namespace

TEST_CASE("unigram mask has exactly round(gamma * V) green tokens") {
    const GreenMask mask = unigram_mask(10, {0.5, 2.0, 7});
    CHECK(mask.green_count() == 5);
    const GreenMask big = unigram_mask(8192, {0.25, 2.0, 7});
    CHECK(big.green_count() == 2048);
}

TEST_CASE("unigram mask is seed-deterministic") {
    CHECK(unigram_mask(512, {0.5, 2.0, 9}) == unigram_mask(512, {0.5, 2.0, 9}));
    CHECK_FALSE(unigram_mask(512, {0.5, 2.0, 9}) == unigram_mask(512, {0.5, 2.0, 10}));
}

TEST_CASE("degenerate partitions are rejected") {
    CHECK_THROWS_WITH_AS(unigram_mask(10, {0.01, 2.0, 1}), doctest::Contains("degenerate"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(unigram_mask(10, {0.99, 2.0, 1}), doctest::Contains("degenerate"),
                         std::runtime_error);
}

TEST_CASE("green sets from independent seeds overlap like chance") {
    const std::uint32_t n = 1024;
    double total_overlap = 0.0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const GreenMask a = unigram_mask(n, {0.5, 2.0, 1000 + s});
        const GreenMask b = unigram_mask(n, {0.5, 2.0, 2000 + s});
        std::uint32_t overlap = 0;
        for (TokenId v = 0; v < n; ++v) {
            if (a.is_green(v) && b.is_green(v)) ++overlap;
        }
        total_overlap += overlap;
    }
    // gamma^2 * V = 256 per pair
    CHECK(total_overlap / 100.0 == doctest::Approx(256.0).epsilon(0.03));
}

TEST_CASE("kgw masks are reproducible and context-sensitive") {
    const std::vector<TokenId> ctx = {4, 9, 2};
    const WatermarkParams params{0.5, 2.0, 5};
    CHECK(kgw_mask(ctx, 2, params, 256) == kgw_mask(ctx, 2, params, 256));

    Rng rng(3);
    int differing = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        std::vector<TokenId> a = {rng.next_below(256)};
        std::vector<TokenId> b = {rng.next_below(256)};
        while (b[0] == a[0]) b[0] = rng.next_below(256);
        if (!(kgw_mask(a, 1, params, 256) == kgw_mask(b, 1, params, 256))) ++differing;
    }
    CHECK(static_cast<double>(differing) / trials > 0.999);
}

TEST_CASE("kgw green count is exact at every step") {
    const WatermarkParams params{0.3, 2.0, 11};
    Rng rng(13);
    for (int t = 0; t < 50; ++t) {
        const std::vector<TokenId> ctx = {rng.next_below(100), rng.next_below(100)};
        CHECK(kgw_mask(ctx, 2, params, 100).green_count() == 30);
    }
}

TEST_CASE("kgw pads short contexts with the begin id") {
    const WatermarkParams params{0.5, 2.0, 5};
    const GreenMask empty_ctx = kgw_mask({}, 2, params, 64);
    const GreenMask one_ctx = kgw_mask(std::vector<TokenId>{7}, 2, params, 64);
    CHECK(empty_ctx.green_count() == 32);
    CHECK_FALSE(empty_ctx == one_ctx);
}

TEST_CASE("context embedding basics") {
    const EmbeddingTable table(21, 64, 16);
    const std::vector<TokenId> single{5};
    const auto e1 = table.context_embedding(single, 4);
    const auto tok = table.token_vector(5);
    for (std::uint32_t i = 0; i < 16; ++i) CHECK(e1[i] == doctest::Approx(tok[i]).epsilon(1e-12));

    const std::vector<TokenId> repeated{5, 5, 5, 5};
    const auto e2 = table.context_embedding(repeated, 4);
    for (std::uint32_t i = 0; i < 16; ++i) CHECK(e2[i] == doctest::Approx(e1[i]).epsilon(1e-12));

    const auto e3 = table.context_embedding({}, 4);
    CHECK(cosine(e3, table.begin_vector()) == doctest::Approx(1.0));
}

TEST_CASE("token vectors are unit norm") {
    const EmbeddingTable table(3, 128, 24);
    for (TokenId v = 0; v < 128; ++v) {
        CHECK(std::sqrt(dot(table.token_vector(v), table.token_vector(v))) ==
              doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("contexts sharing tokens are closer than random ones") {
    const EmbeddingTable table(33, 512, 24);
    Rng rng(7);
    double shared_cos = 0.0, random_cos = 0.0;
    const int trials = 400;
    for (int t = 0; t < trials; ++t) {
        std::vector<TokenId> a(4), b(4), c(4);
        for (int i = 0; i < 4; ++i) {
            a[i] = rng.next_below(512);
            b[i] = i < 3 ? a[i] : rng.next_below(512);
            c[i] = rng.next_below(512);
        }
        shared_cos += cosine(table.context_embedding(a, 4), table.context_embedding(b, 4));
        random_cos += cosine(table.context_embedding(a, 4), table.context_embedding(c, 4));
    }
    CHECK(shared_cos / trials > random_cos / trials + 0.3);
}

TEST_CASE("semantic bias is deterministic and antisymmetric on the raw sphere") {
    const EmbeddingTable table(4, 256, 16);
    const WatermarkParams params{0.5, 2.0, 4};
    std::vector<double> e(16, 0.0);
    e[0] = 0.6;
    e[1] = -0.8;

    const LogitVector b1 = sir_bias_logits(e, table, params);
    const LogitVector b2 = sir_bias_logits(e, table, params);
    CHECK(b1 == b2);

    std::vector<double> neg(e);
    for (double& x : neg) x = -x;
    const LogitVector b3 = sir_bias_logits(neg, table, params);
    int ties = 0;
    for (TokenId v = 0; v < 256; ++v) {
        if (table.row_score(v, e) == 0.0) {
            ++ties;
            continue;
        }
        REQUIRE(b3[v] == -b1[v]);
    }
    CHECK(ties <= 1);
}

TEST_CASE("bias similarity rises with embedding similarity") {
    const EmbeddingTable table(8, 4096, 16);
    const WatermarkParams params{0.5, 2.0, 8};
    std::vector<double> u(16, 0.0), w(16, 0.0);
    u[2] = 1.0;
    w[9] = 1.0;

    double prev = 1.1;
    for (double theta : {0.2, 0.6, 1.0, 1.4}) {
        std::vector<double> e(16);
        for (int i = 0; i < 16; ++i) e[i] = std::cos(theta) * u[i] + std::sin(theta) * w[i];
        const LogitVector bu = sir_bias_logits(u, table, params);
        const LogitVector be = sir_bias_logits(e, table, params);
        const double c = cosine(bu, be);
        CHECK(c < prev);
        prev = c;
    }
}

TEST_CASE("semantic continuity: close embeddings give close bias vectors") {
    const EmbeddingTable table(10, 4096, 24);
    const WatermarkParams params{0.5, 2.0, 10};
    Rng rng(55);
    std::vector<double> cosines;
    for (int t = 0; t < 60; ++t) {
        std::vector<double> e1(24), noise(24);
        for (auto& x : e1) x = rng.next_gaussian();
        for (auto& x : noise) x = rng.next_gaussian();
        normalize(e1);
        normalize(noise);
        std::vector<double> e2(24);
        for (int i = 0; i < 24; ++i) e2[i] = e1[i] + 0.18 * noise[i];
        normalize(e2);
        if (cosine(e1, e2) < 0.95) continue;
        cosines.push_back(cosine(sir_bias_logits(e1, table, params), sir_bias_logits(e2, table, params)));
    }
    REQUIRE(cosines.size() > 20);
    std::sort(cosines.begin(), cosines.end());
    CHECK(cosines[cosines.size() / 2] >= 0.8);
}

TEST_CASE("scaling watermark: delta 0 returns the centered logits") {
    const EmbeddingTable table(5, 32, 8);
    LogitVector logits(32);
    Rng rng(6);
    for (auto& l : logits) l = rng.next_gaussian();
    double mean = std::accumulate(logits.begin(), logits.end(), 0.0) / 32.0;

    std::vector<double> e(8, 0.0);
    e[0] = 1.0;
    const LogitVector out = atw_scaled_logits(logits, e, table, {0.5, 0.0, 5});
    for (TokenId v = 0; v < 32; ++v) {
        CHECK(out[v] == doctest::Approx(logits[v] - mean).epsilon(1e-12));
    }
}

TEST_CASE("uniform scaling is only a temperature change") {
    // When every token scales by the same factor c, softmax(centered * c)
    // equals the base distribution sharpened to power c.
    LogitVector logits = {-1.0, -2.5, -0.3, -4.0};
    const double c = 3.0;
    double mean = std::accumulate(logits.begin(), logits.end(), 0.0) / 4.0;
    double z_scaled = 0.0, z_pow = 0.0;
    std::vector<double> scaled(4), powed(4);
    for (int v = 0; v < 4; ++v) {
        scaled[v] = std::exp((logits[v] - mean) * c);
        powed[v] = std::exp(logits[v] * c);
        z_scaled += scaled[v];
        z_pow += powed[v];
    }
    for (int v = 0; v < 4; ++v) {
        CHECK(scaled[v] / z_scaled == doctest::Approx(powed[v] / z_pow).epsilon(1e-12));
    }
}

TEST_CASE("watermarked decoding with delta 0 equals base sampling, token for token") {
    const auto& w = testing::world();
    for (SchemeKind kind : {SchemeKind::unigram, SchemeKind::kgw, SchemeKind::sir_like,
                            SchemeKind::atw_like}) {
        const SchemeOracle oracle(make_spec(kind, 0.5, 0.0, 77), w.vocab.size());
        Rng a(123), b(123);
        const TaggedSeq wm = generate_watermarked(w.generator, oracle, w.base[1].ids, 150, a);
        const TokenSeq base = generate_text(w.generator, w.base[1].ids, 150, b);
        CHECK(wm.tokens.ids == base.ids);
    }
}

TEST_CASE("two-token vocabulary boost has the closed softmax form") {
    // Equal base logits, one green token, delta 2: P(green) = e^2/(e^2+1).
    std::vector<TokenSeq> docs(1);
    docs[0].ids = {0, 1};
    const auto model = NGramModel::train(docs, 1, 1e-7, 2, 0);

    std::uint64_t seed = 0;
    for (std::uint64_t s = 1; s < 50; ++s) {
        if (unigram_mask(2, {0.5, 2.0, s}).is_green(0)) {
            seed = s;
            break;
        }
    }
    REQUIRE(seed != 0);
    const SchemeOracle oracle(make_spec(SchemeKind::unigram, 0.5, 2.0, seed), 2);
    const auto dist = watermarked_next_distribution(model, oracle, {});
    const double expected = std::exp(2.0) / (std::exp(2.0) + 1.0);
    CHECK(dist[0] == doctest::Approx(expected).epsilon(1e-6));
    CHECK(expected == doctest::Approx(0.8807970779778823).epsilon(1e-12));

    // And the sampler agrees empirically.
    Rng rng(5);
    int green = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        TaggedSeq one = generate_watermarked(model, oracle, {}, 1, rng);
        green += one.green[0];
    }
    const double sigma = std::sqrt(expected * (1 - expected) * n);
    CHECK(std::abs(green - expected * n) < 3.0 * sigma);
}

TEST_CASE("post-boost distributions are valid probabilities for every scheme") {
    const auto& w = testing::world();
    for (SchemeKind kind : {SchemeKind::unigram, SchemeKind::kgw, SchemeKind::sir_like,
                            SchemeKind::atw_like}) {
        const SchemeOracle oracle(make_spec(kind, 0.5, 2.0, 31), w.vocab.size());
        Rng rng(71);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<TokenId> ctx;
            for (int i = 0; i < 3; ++i) ctx.push_back(rng.next_below(w.vocab.size()));
            const auto dist = watermarked_next_distribution(w.generator, oracle, ctx);
            double sum = 0.0;
            for (double p : dist) {
                REQUIRE(p >= 0.0);
                sum += p;
            }
            REQUIRE(std::abs(sum - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("delta 0 watermarked distribution is exactly the base distribution") {
    const auto& w = testing::world();
    const auto base = w.generator.next_token_distribution(w.base[3].ids);
    for (SchemeKind kind : {SchemeKind::unigram, SchemeKind::kgw, SchemeKind::sir_like,
                            SchemeKind::atw_like}) {
        const SchemeOracle oracle(make_spec(kind, 0.5, 0.0, 3), w.vocab.size());
        const auto dist = watermarked_next_distribution(w.generator, oracle, w.base[3].ids);
        double tv = 0.0;
        for (std::size_t v = 0; v < dist.size(); ++v) tv += std::abs(dist[v] - base[v]);
        CHECK(tv == 0.0);
    }
}

TEST_CASE("sampler distribution matches the enumerated watermarked distribution") {
    std::vector<TokenSeq> docs(1);
    docs[0].ids = {0, 1, 2, 3, 0, 1, 0, 2};
    const auto model = NGramModel::train(docs, 2, 0.2, 4, 0);
    for (SchemeKind kind : {SchemeKind::unigram, SchemeKind::kgw, SchemeKind::sir_like}) {
        const SchemeOracle oracle(make_spec(kind, 0.5, 1.5, 13), 4);
        const std::vector<TokenId> prompt{0};
        const auto dist = watermarked_next_distribution(model, oracle, prompt);
        Rng rng(29);
        const int n = 200000;
        std::vector<int> counts(4, 0);
        for (int i = 0; i < n; ++i) {
            Rng local = rng.fork(i);
            const TaggedSeq one = generate_watermarked(model, oracle, prompt, 1, local);
            ++counts[one.tokens.ids[0]];
        }
        for (TokenId v = 0; v < 4; ++v) {
            const double sigma = std::sqrt(dist[v] * (1 - dist[v]) * n);
            REQUIRE(std::abs(counts[v] - dist[v] * n) < 4.0 * sigma + 2.0);
        }
    }
}

TEST_CASE("unigram watermarked text is heavily green") {
    const auto& w = testing::world();
    const SchemeOracle oracle(make_spec(SchemeKind::unigram, 0.5, 2.0, 19), w.vocab.size());
    Rng rng(83);
    const TaggedSeq doc = generate_watermarked(w.generator, oracle, w.base[0].ids, 100000, rng);
    const double green =
        static_cast<double>(std::accumulate(doc.green.begin(), doc.green.end(), 0u));
    const double frac = green / 100000.0;
    // z = (g - gamma T) / sqrt(T gamma (1-gamma)) must be far beyond 4
    const double z = (green - 0.5 * 100000.0) / std::sqrt(100000.0 * 0.25);
    CHECK(frac > 0.55);
    CHECK(z > 20.0);
}

TEST_CASE("scaling watermark raises the green fraction") {
    const auto& w = testing::world();
    const SchemeOracle oracle(make_spec(SchemeKind::atw_like, 0.5, 2.0, 23), w.vocab.size());
    Rng rng(91);
    const TaggedSeq doc = generate_watermarked(w.generator, oracle, w.base[0].ids, 20000, rng);
    const double green =
        static_cast<double>(std::accumulate(doc.green.begin(), doc.green.end(), 0u));
    CHECK(green / 20000.0 > 0.52);
}

TEST_CASE("generation tags match the scheme oracle recomputation") {
    const auto& w = testing::world();
    for (SchemeKind kind : {SchemeKind::unigram, SchemeKind::kgw, SchemeKind::sir_like}) {
        const SchemeOracle oracle(make_spec(kind, 0.5, 2.0, 47), w.vocab.size());
        Rng rng(3);
        const TaggedSeq doc = generate_watermarked(w.generator, oracle, {}, 300, rng);
        for (std::size_t i = 0; i < doc.tokens.ids.size(); ++i) {
            const StepMask mask = oracle.step({doc.tokens.ids.data(), i});
            REQUIRE(mask.is_green(doc.tokens.ids[i]) == static_cast<bool>(doc.green[i]));
        }
    }
}

TEST_CASE("majority mask follows the dominant tag") {
    std::vector<TaggedSeq> docs(1);
    docs[0].tokens.ids = {3, 3, 3, 5, 5};
    docs[0].green = {1, 1, 0, 0, 0};
    const GreenMask mask = majority_green_mask(docs, 8);
    CHECK(mask.is_green(3));
    CHECK_FALSE(mask.is_green(5));
    CHECK_FALSE(mask.is_green(0));
}
