#include <stdexcept>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "doctest.h"
#include "fixtures.hpp"
#include "wmlab/ngram.hpp"

using namespace wmlab;

namespace {

TokenSeq seq(std::vector<TokenId> ids) {
    TokenSeq s;
    s.ids = std::move(ids);
    return s;
}

std::vector<TokenId> random_context(Rng& rng, std::uint32_t vocab_size, std::size_t len) {
    std::vector<TokenId> ctx(len);
    for (auto& id : ctx) id = rng.next_below(vocab_size);
    return ctx;
}

}  // namespace

TEST_CASE("unigram probabilities approach count ratios as k goes to zero") {
    const auto model = NGramModel::train({seq({0, 0, 1})}, 1, 1e-9, 2, 0);
    CHECK(model.token_prob({}, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK(model.token_prob({}, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("next-token distribution sums to one for random contexts") {
    const auto& w = testing::world();
    Rng rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto ctx = random_context(rng, w.vocab.size(), trial % 4);
        const auto probs = w.generator.next_token_distribution(ctx);
        const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
        REQUIRE(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("training text is more likely than a shuffled version") {
    const auto& w = testing::world();
    TokenSeq flat;
    for (std::size_t i = 0; i < 30; ++i) {
        flat.ids.insert(flat.ids.end(), w.train[i].ids.begin(), w.train[i].ids.end());
    }
    TokenSeq shuffled = flat;
    Rng rng(17);
    for (std::size_t i = shuffled.ids.size(); i > 1; --i) {
        std::swap(shuffled.ids[i - 1], shuffled.ids[rng.next_below(static_cast<std::uint32_t>(i))]);
    }
    CHECK(w.generator.sequence_log_prob(flat.ids) > w.generator.sequence_log_prob(shuffled.ids));
    CHECK(w.generator.perplexity(flat.ids) < w.generator.perplexity(shuffled.ids));
}

TEST_CASE("uniform model yields equal logits and exact perplexity") {
    const auto model = testing::tiny_model(10);
    const auto logits = model.next_token_logits({});
    for (double l : logits) CHECK(l == doctest::Approx(logits[0]).epsilon(1e-12));

    double exp_sum = 0.0;
    for (double l : logits) exp_sum += std::exp(l);
    CHECK(exp_sum == doctest::Approx(1.0).epsilon(1e-9));

    CHECK(model.perplexity(seq({0, 3, 7, 1}).ids) == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("single-token perplexity is the reciprocal probability") {
    const auto model = NGramModel::train({seq({0, 0, 1})}, 1, 0.5, 2, 0);
    const double p = model.token_prob({}, 1);
    CHECK(model.perplexity(seq({1}).ids) == doctest::Approx(1.0 / p).epsilon(1e-12));
}

TEST_CASE("perplexity rejects empty sequences") {
    const auto model = testing::tiny_model(4);
    CHECK_THROWS_AS(model.perplexity({}), std::invalid_argument);
}

TEST_CASE("a context seen many times dominates the logits") {
    std::vector<TokenSeq> docs;
    for (int i = 0; i < 100; ++i) docs.push_back(seq({5, 7}));
    const auto model = NGramModel::train(docs, 2, 0.1, 10, 0);
    const std::vector<TokenId> ctx{5};
    const auto probs = model.next_token_distribution(ctx);
    // the observed continuation wins; unseen tokens keep only smoothing mass
    for (TokenId v = 0; v < 10; ++v) {
        if (v == 7) continue;
        CHECK(probs[7] > 2.0 * probs[v]);
        if (v != 5) CHECK(probs[7] > 50.0 * probs[v]);
    }
}

TEST_CASE("sampling matches the analytic distribution within 3 sigma") {
    const auto model = NGramModel::train({seq({0, 0, 0, 1, 1, 2})}, 1, 0.3, 4, 0);
    const auto probs = model.next_token_distribution({});
    Rng rng(23);
    const int n = 100000;
    std::vector<int> counts(4, 0);
    for (int i = 0; i < n; ++i) ++counts[sample_next(model, {}, 1.0, nullptr, rng)];
    for (TokenId v = 0; v < 4; ++v) {
        const double expect = probs[v] * n;
        const double sigma = std::sqrt(probs[v] * (1.0 - probs[v]) * n);
        CHECK(std::abs(counts[v] - expect) < 3.0 * sigma + 1.0);
    }
}

TEST_CASE("near-zero temperature picks the argmax") {
    const auto model = NGramModel::train({seq({0, 0, 0, 0, 1})}, 1, 0.1, 3, 0);
    Rng rng(31);
    for (int i = 0; i < 50; ++i) {
        CHECK(sample_next(model, {}, 1e-6, nullptr, rng) == 0);
    }
}

TEST_CASE("a huge bias forces the token") {
    const auto model = testing::tiny_model(6);
    LogitVector bias(6, 0.0);
    bias[4] = 60.0;
    Rng rng(37);
    for (int i = 0; i < 50; ++i) {
        CHECK(sample_next(model, {}, 1.0, &bias, rng) == 4);
    }
}

TEST_CASE("bias length mismatch is an error") {
    const auto model = testing::tiny_model(6);
    LogitVector bias(5, 0.0);
    Rng rng(1);
    CHECK_THROWS_WITH_AS(sample_next(model, {}, 1.0, &bias, rng), doctest::Contains("bias length"),
                         std::invalid_argument);
}

TEST_CASE("identical seeds give identical token streams") {
    const auto& w = testing::world();
    Rng a(99), b(99);
    const auto ta = generate_text(w.generator, w.base[0].ids, 200, a);
    const auto tb = generate_text(w.generator, w.base[0].ids, 200, b);
    CHECK(ta.ids == tb.ids);
}

TEST_CASE("raising smoothing_k moves distributions toward uniform") {
    const auto& w = testing::world();
    const std::uint32_t n = w.vocab.size();
    std::vector<NGramModel> models;
    for (double k : {0.01, 0.1, 1.0, 10.0}) {
        models.push_back(NGramModel::train(w.train, 3, k, n, w.vocab.content_hash()));
    }
    Rng rng(41);
    const double log_n = std::log(static_cast<double>(n));
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<TokenId> ctx = {w.base[trial].ids[3], w.base[trial].ids[4]};
        double prev_kl = 1e100;
        for (const auto& model : models) {
            const auto probs = model.next_token_distribution(ctx);
            double kl = 0.0;
            for (double p : probs) {
                if (p > 0.0) kl += p * (std::log(p) + log_n);
            }
            REQUIRE(kl <= prev_kl + 1e-12);
            prev_kl = kl;
        }
    }
}

TEST_CASE("model save/load round trips and checks the vocab hash") {
    const auto& w = testing::world();
    const auto path = std::filesystem::temp_directory_path() / "wmlab_ngram_test.bin";
    const auto model = NGramModel::train({w.train[0], w.train[1]}, 3, 0.1, w.vocab.size(),
                                         w.vocab.content_hash());
    model.save(path.string());

    const auto loaded = NGramModel::load(path.string(), w.vocab);
    CHECK(loaded.order() == model.order());
    Rng a(3), b(3);
    for (int i = 0; i < 100; ++i) {
        const auto ctx = w.train[2].ids;
        CHECK(model.propose(ctx, a) == loaded.propose(ctx, b));
    }

    CHECK_THROWS_WITH_AS(NGramModel::load(path.string(), w.vocab.content_hash() + 1),
                         doctest::Contains("vocab hash mismatch"), std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("entropy is the Shannon entropy of the distribution") {
    const auto model = testing::tiny_model(8);
    CHECK(model.entropy({}) == doctest::Approx(std::log(8.0)).epsilon(1e-9));
}

TEST_CASE("training rejects bad arguments") {
    CHECK_THROWS_AS(NGramModel::train({seq({0})}, 0, 0.1, 2, 0), std::invalid_argument);
    CHECK_THROWS_AS(NGramModel::train({seq({0})}, 1, 0.0, 2, 0), std::invalid_argument);
    CHECK_THROWS_WITH_AS(NGramModel::train({seq({})}, 1, 0.1, 2, 0),
                         doctest::Contains("empty corpus"), std::runtime_error);
}
