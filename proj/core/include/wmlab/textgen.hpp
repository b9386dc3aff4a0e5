#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wmlab {

// Seeded generator of English-like prose used as the lab's human corpus.
// Documents are sampled from a sentence-template grammar: shared English
// function words carry roughly half of the token mass, content slots draw
// pseudo-word lemmas from a power-law distribution, and a small set of
// fixed boilerplate sentences provides low-entropy stretches.  The two
// genres share the closed-class words but have disjoint content lexicons,
// which makes one a genre-shifted (out-of-domain) counterpart of the other.
enum class Genre : std::uint8_t { story, technical };

Genre genre_from_name(const std::string& name);
const char* genre_name(Genre genre);

// Deterministic: document i of a given (genre, seed) never changes.
std::string synth_document(Genre genre, std::uint64_t seed, std::uint64_t doc_index,
                           std::size_t target_tokens);

std::vector<std::string> synth_corpus(Genre genre, std::uint64_t seed, std::size_t num_docs,
                                      std::size_t target_tokens);

// Content lemma surface form; exposed so tests can assert genre lexicons
// are disjoint.
std::string content_word(Genre genre, int word_class, std::uint32_t rank);

}  // namespace wmlab
