#include <stdexcept>
#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "wmlab/rng.hpp"

using namespace wmlab;

TEST_CASE("mix64 avalanches single-bit changes") {
    int differing_bits = 0;
    const std::uint64_t a = mix64(0x1234);
    const std::uint64_t b = mix64(0x1235);
    for (int i = 0; i < 64; ++i) {
        if (((a ^ b) >> i) & 1) ++differing_bits;
    }
    CHECK(differing_bits > 16);
}

TEST_CASE("rng streams are reproducible") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("next_double in [0,1) and roughly uniform") {
    Rng rng(7);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.next_double();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / 100000.0 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("next_below respects bound") {
    Rng rng(9);
    std::vector<int> counts(10, 0);
    for (int i = 0; i < 100000; ++i) ++counts[rng.next_below(10)];
    for (int c : counts) {
        CHECK(c > 9000);
        CHECK(c < 11000);
    }
}

TEST_CASE("seed_stream is stable and label-separated") {
    CHECK(seed_stream(1, "gen", 0) == seed_stream(1, "gen", 0));
    CHECK(seed_stream(1, "gen", 0) != seed_stream(1, "gen", 1));
    CHECK(seed_stream(1, "gen", 0) != seed_stream(1, "attack", 0));
    CHECK(seed_stream(1, "gen", 0) != seed_stream(2, "gen", 0));
}

TEST_CASE("seed_stream has no collisions across a million indices") {
    std::vector<std::uint64_t> seeds;
    seeds.reserve(1000000);
    for (std::uint64_t i = 0; i < 1000000; ++i) seeds.push_back(seed_stream(123, "scan", i));
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
}

TEST_CASE("slot permutation is a bijection with exact counts") {
    for (std::uint32_t domain : {2u, 10u, 100u, 1000u, 4095u}) {
        SlotPermutation perm(0xABCDEF, domain);
        std::set<std::uint32_t> image;
        for (std::uint32_t v = 0; v < domain; ++v) {
            const std::uint32_t slot = perm.slot_of(v);
            REQUIRE(slot < domain);
            image.insert(slot);
        }
        CHECK(image.size() == domain);
    }
}

TEST_CASE("slot permutation depends on the key") {
    SlotPermutation a(1, 512), b(2, 512);
    int moved = 0;
    for (std::uint32_t v = 0; v < 512; ++v) {
        if (a.slot_of(v) != b.slot_of(v)) ++moved;
    }
    CHECK(moved > 400);
}

TEST_CASE("gaussian moments") {
    Rng rng(11);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double g = rng.next_gaussian();
        sum += g;
        sq += g * g;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(0.02));
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.02));
}
