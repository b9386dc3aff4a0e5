#include <stdexcept>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "fixtures.hpp"
#include "wmlab/attack.hpp"

using namespace wmlab;

namespace {

struct AttackWorld {
    NGramModel paraphraser;
    TokenFrequencies base_freq;
    std::vector<bool> stopwords;
    SchemeOracle oracle;
    std::vector<TaggedSeq> wm_docs;
};

const AttackWorld& attack_world() {
    static const AttackWorld aw = [] {
        const auto& w = testing::world();
        SchemeSpec spec;
        spec.kind = SchemeKind::unigram;
        spec.params = {0.5, 2.0, 61};
        AttackWorld world{
            NGramModel::train(w.base, 3, 0.0001, w.vocab.size(), w.vocab.content_hash()),
            token_frequencies(w.base, w.vocab.size()),
            {},
            SchemeOracle(spec, w.vocab.size()),
            {},
        };
        world.stopwords = stopword_flags(world.base_freq, 50);
        for (int d = 0; d < 110; ++d) {
            Rng rng(7000 + d);
            world.wm_docs.push_back(
                generate_watermarked(w.generator, world.oracle, {w.downstream[d].ids.data(), 30},
                                     200, rng));
        }
        return world;
    }();
    return aw;
}

AttackConfig base_config(const AttackWorld& aw) {
    AttackConfig cfg;
    cfg.paraphraser = &aw.paraphraser;
    cfg.stopwords = &aw.stopwords;
    cfg.fidelity = 4.0;
    cfg.seed = 1;
    return cfg;
}

}  // namespace

TEST_CASE("diversity zero copies the source verbatim") {
    const auto& aw = attack_world();
    AttackConfig cfg = base_config(aw);
    cfg.diversity = 0.0;
    Rng rng(5);
    const TokenSeq out = paraphrase(aw.wm_docs[0].tokens, cfg, rng);
    CHECK(out.ids == aw.wm_docs[0].tokens.ids);
    CHECK(out.source_label == SourceLabel::attacked);
}

TEST_CASE("full-diversity source-blind resampling has only chance overlap") {
    const auto& aw = attack_world();
    AttackConfig cfg = base_config(aw);
    cfg.diversity = 1.0;
    cfg.fidelity = 0.0;
    Rng rng(6);
    const TokenSeq out = paraphrase(aw.wm_docs[0].tokens, cfg, rng);
    CHECK(out.ids != aw.wm_docs[0].tokens.ids);
    CHECK(overlap_score(aw.wm_docs[0].tokens, out, aw.stopwords) < 0.25);
}

TEST_CASE("the copy branch reproduces source tokens exactly") {
    const auto& aw = attack_world();
    AttackConfig cfg = base_config(aw);
    cfg.diversity = 0.4;
    cfg.fidelity = 0.0;
    const TokenSeq& src = aw.wm_docs[1].tokens;
    Rng rng(17);
    const TokenSeq out = paraphrase(src, cfg, rng);

    // Replay the sampler's draw pattern: one decision draw per position,
    // three more per resampled position.
    Rng replay(17);
    std::size_t copies = 0;
    for (std::size_t i = 0; i < src.ids.size(); ++i) {
        if (replay.next_double() < 1.0 - cfg.diversity) {
            REQUIRE(out.ids[i] == src.ids[i]);
            ++copies;
        } else {
            replay.next_double();
            replay.next_double();
            replay.next_double();
        }
    }
    CHECK(copies > src.ids.size() / 3);
}

TEST_CASE("paraphrase is deterministic given the seed") {
    const auto& aw = attack_world();
    AttackConfig cfg = base_config(aw);
    cfg.diversity = 0.6;
    cfg.bias_delta = 2.0;
    cfg.estimated_mask = &aw.oracle.fixed_mask();
    Rng a(21), b(21);
    CHECK(paraphrase(aw.wm_docs[2].tokens, cfg, a).ids == paraphrase(aw.wm_docs[2].tokens, cfg, b).ids);
}

TEST_CASE("paraphrase validates its configuration") {
    const auto& aw = attack_world();
    Rng rng(1);
    AttackConfig cfg = base_config(aw);
    cfg.diversity = 1.5;
    CHECK_THROWS_AS(paraphrase(aw.wm_docs[0].tokens, cfg, rng), std::invalid_argument);

    cfg = base_config(aw);
    GreenMask wrong_size(16);
    cfg.estimated_mask = &wrong_size;
    cfg.bias_delta = 1.0;
    CHECK_THROWS_WITH_AS(paraphrase(aw.wm_docs[0].tokens, cfg, rng),
                         doctest::Contains("mask length"), std::invalid_argument);

    cfg = base_config(aw);
    TokenSeq empty;
    CHECK_THROWS_AS(paraphrase(empty, cfg, rng), std::invalid_argument);
}

TEST_CASE("overlap score basics") {
    const auto& aw = attack_world();
    TokenSeq a, b;
    a.ids = {100, 200, 300};
    b.ids = {400, 500, 600};
    CHECK(overlap_score(a, a, aw.stopwords) == doctest::Approx(1.0));
    CHECK(overlap_score(a, b, aw.stopwords) == doctest::Approx(0.0));
}

TEST_CASE("overlap decreases with diversity") {
    const auto& aw = attack_world();
    double prev = 1.1;
    for (double diversity : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        AttackConfig cfg = base_config(aw);
        cfg.diversity = diversity;
        cfg.fidelity = 0.0;
        std::vector<double> overlaps;
        for (int d = 0; d < 40; ++d) {
            Rng rng(seed_stream(3, "sweep", static_cast<std::uint64_t>(d)));
            const TokenSeq out = paraphrase(aw.wm_docs[d].tokens, cfg, rng);
            overlaps.push_back(overlap_score(aw.wm_docs[d].tokens, out, aw.stopwords));
        }
        const double med = median(overlaps);
        CHECK(med < prev);
        prev = med;
    }
}

TEST_CASE("a true-mask bias lowers the green fraction of resampled text") {
    const auto& aw = attack_world();
    double prev_green = 1.0;
    for (double bias : {0.0, 2.0, 4.0}) {
        AttackConfig cfg = base_config(aw);
        cfg.diversity = 1.0;
        cfg.bias_delta = bias;
        cfg.estimated_mask = &aw.oracle.fixed_mask();
        std::uint64_t green = 0, total = 0;
        for (int d = 0; d < 25; ++d) {
            Rng rng(seed_stream(4, "bias", static_cast<std::uint64_t>(d)));
            const TokenSeq out = paraphrase(aw.wm_docs[d].tokens, cfg, rng);
            const auto [g, t] = count_green(out, aw.oracle);
            green += g;
            total += t;
        }
        const double frac = static_cast<double>(green) / static_cast<double>(total);
        CHECK(frac < prev_green + 1e-9);
        prev_green = frac;
    }
    CHECK(prev_green < 0.35);  // bias 4 pushes well below gamma
}

TEST_CASE("attack evaluation produces ordered detection rows") {
    const auto& aw = attack_world();
    const auto& w = testing::world();

    std::vector<TokenSeq> wm_plain;
    for (const auto& d : aw.wm_docs) wm_plain.push_back(d.tokens);
    std::vector<TokenSeq> nulls;
    for (std::size_t i = 0; i < 120; ++i) {
        TokenSeq doc;
        doc.ids.assign(w.downstream[i + 100].ids.begin(), w.downstream[i + 100].ids.begin() + 200);
        nulls.push_back(std::move(doc));
    }

    AttackConfig plain = base_config(aw);
    plain.diversity = 0.6;
    AttackConfig biased = plain;
    biased.bias_delta = 4.0;
    biased.estimated_mask = &aw.oracle.fixed_mask();

    const SchemeEvalInput scheme{&aw.oracle, &wm_plain};
    const std::vector<NamedAttack> attacks = {
        {"none", std::nullopt}, {"plain", plain}, {"biased", biased}};
    const auto rows =
        run_attack_eval({&scheme, 1}, attacks, nulls, w.generator, 2);

    REQUIRE(rows.size() == 3);
    CHECK(rows[0].attack == "none");
    CHECK(rows[0].tpr_1 >= rows[1].tpr_1);
    CHECK(rows[1].tpr_1 >= rows[2].tpr_1);
    CHECK(rows[0].overlap_median == doctest::Approx(1.0));
    CHECK(rows[1].overlap_median > rows[2].overlap_median - 0.5);
    for (const auto& row : rows) {
        CHECK(row.ppl_median > 1.0);
        CHECK(row.scheme == "unigram");
    }
}
