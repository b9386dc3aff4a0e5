#include <stdexcept>
#include <filesystem>

#include "doctest.h"
#include "fixtures.hpp"
#include "wmlab/vocab.hpp"

using namespace wmlab;

TEST_CASE("build_vocab keeps the most frequent strings plus unk") {
    const Vocab v = build_vocab({"a a b"}, 3);
    CHECK(v.size() == 3);
    CHECK(v.token_of(0) == "<unk>");
    CHECK(v.token_of(1) == "a");
    CHECK(v.token_of(2) == "b");
}

TEST_CASE("build_vocab single token") {
    const Vocab v = build_vocab({"x"}, 2);
    CHECK(v.size() == 2);
    CHECK(v.contains("x"));
    CHECK(v.id_of("y") == v.unk_id());
}

TEST_CASE("build_vocab is deterministic") {
    const std::vector<std::string> texts = {"the cat sat", "the dog sat", "a cat ran"};
    const Vocab a = build_vocab(texts, 5);
    const Vocab b = build_vocab(texts, 5);
    CHECK(a == b);
}

TEST_CASE("build_vocab breaks frequency ties lexicographically") {
    const Vocab v = build_vocab({"zz aa zz aa mm"}, 3);
    CHECK(v.token_of(1) == "aa");
    CHECK(v.token_of(2) == "zz");
}

TEST_CASE("build_vocab rejects empty corpora and bad sizes") {
    CHECK_THROWS_WITH_AS(build_vocab({}, 4), doctest::Contains("empty corpus"), std::runtime_error);
    CHECK_THROWS_AS(build_vocab({"a"}, 1), std::invalid_argument);
}

TEST_CASE("tokenize lowercases and splits punctuation") {
    const Vocab v = build_vocab({"the cat ."}, 8);
    const auto ids = tokenize("The cat.", v);
    REQUIRE(ids.size() == 3);
    CHECK(v.token_of(ids[0]) == "the");
    CHECK(v.token_of(ids[1]) == "cat");
    CHECK(v.token_of(ids[2]) == ".");
}

TEST_CASE("tokenize maps unknown strings to unk") {
    const Vocab v = build_vocab({"a b"}, 4);
    const auto ids = tokenize("zzz", v);
    REQUIRE(ids.size() == 1);
    CHECK(ids[0] == v.unk_id());
}

TEST_CASE("tokenize of empty text is empty") {
    const Vocab v = build_vocab({"a"}, 2);
    CHECK(tokenize("", v).empty());
    CHECK(tokenize("   ", v).empty());
}

TEST_CASE("detokenize-retokenize round trips in-vocab text") {
    const auto docs = synth_corpus(Genre::story, 77, 20, 200);
    const Vocab v = build_vocab(docs, Vocab::kMaxSize);
    for (const auto& doc : docs) {
        const auto ids = tokenize(doc, v);
        const auto again = tokenize(detokenize(ids, v), v);
        CHECK(ids == again);
    }
}

TEST_CASE("vocab save/load round trip") {
    const Vocab v = build_vocab({"the cat sat on the mat ."}, 16);
    const auto path = std::filesystem::temp_directory_path() / "wmlab_vocab_test.txt";
    v.save(path.string());
    const Vocab loaded = Vocab::load(path.string());
    CHECK(v == loaded);
    CHECK(v.content_hash() == loaded.content_hash());
    std::filesystem::remove(path);
}
