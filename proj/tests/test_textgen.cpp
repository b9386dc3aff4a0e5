#include <stdexcept>
#include <set>

#include "doctest.h"
#include "wmlab/textgen.hpp"
#include "wmlab/vocab.hpp"

using namespace wmlab;

TEST_CASE("synthesis is deterministic per (genre, seed, index)") {
    CHECK(synth_document(Genre::story, 1, 0, 200) == synth_document(Genre::story, 1, 0, 200));
    CHECK(synth_document(Genre::story, 1, 0, 200) != synth_document(Genre::story, 1, 1, 200));
    CHECK(synth_document(Genre::story, 1, 0, 200) != synth_document(Genre::story, 2, 0, 200));
}

TEST_CASE("documents reach the requested token count") {
    const std::string doc = synth_document(Genre::story, 3, 5, 250);
    CHECK(split_tokens(doc).size() >= 250);
    CHECK(split_tokens(doc).size() < 290);
}

TEST_CASE("content lexicons are disjoint across genres") {
    std::set<std::string> story_words, tech_words;
    for (int cls = 0; cls < 3; ++cls) {
        for (std::uint32_t rank = 0; rank < 2000; ++rank) {
            story_words.insert(content_word(Genre::story, cls, rank));
            tech_words.insert(content_word(Genre::technical, cls, rank));
        }
    }
    CHECK(story_words.size() == 6000);  // no collisions within a genre either
    CHECK(tech_words.size() == 6000);
    for (const auto& word : story_words) {
        REQUIRE(tech_words.find(word) == tech_words.end());
    }
}

TEST_CASE("content words are unique across classes and ranks") {
    std::set<std::string> words;
    for (int cls = 0; cls < 3; ++cls) {
        for (std::uint32_t rank = 0; rank < 5000; ++rank) {
            words.insert(content_word(Genre::story, cls, rank));
        }
    }
    CHECK(words.size() == 15000);
}

TEST_CASE("genres share function words but not content") {
    const auto story = synth_corpus(Genre::story, 9, 50, 300);
    const auto tech = synth_corpus(Genre::technical, 9, 50, 300);
    const Vocab story_vocab = build_vocab(story, Vocab::kMaxSize);

    std::size_t total = 0, unk = 0;
    for (const auto& doc : tech) {
        for (TokenId id : tokenize(doc, story_vocab)) {
            ++total;
            if (id == story_vocab.unk_id()) ++unk;
        }
    }
    const double unk_rate = static_cast<double>(unk) / static_cast<double>(total);
    CHECK(unk_rate > 0.25);  // content words fall out of vocabulary
    CHECK(unk_rate < 0.75);  // function words survive
}
