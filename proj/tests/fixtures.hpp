#pragma once

#include <vector>

#include "wmlab/corpus.hpp"
#include "wmlab/ngram.hpp"
#include "wmlab/textgen.hpp"
#include "wmlab/vocab.hpp"

namespace wmlab::testing {

// Shared mid-size world for statistical tests; built once per process.
struct World {
    Vocab vocab;
    std::vector<TokenSeq> train;       // generator training slice
    std::vector<TokenSeq> base;        // reference ("human") slice
    std::vector<TokenSeq> base_alt;    // second human slice, different seed
    std::vector<TokenSeq> downstream;  // prompt slice
    std::vector<TokenSeq> ood;         // disjoint-genre slice
    NGramModel generator;              // order 3
    NGramModel uniformish;             // order 1 scoring model
};

inline const World& world() {
    static const World w = [] {
        World world;
        const auto train_raw = synth_corpus(Genre::story, 101, 700, 300);
        const auto base_raw = synth_corpus(Genre::story, 202, 700, 300);
        const auto base_alt_raw = synth_corpus(Genre::story, 303, 700, 300);
        const auto downstream_raw = synth_corpus(Genre::story, 404, 400, 300);
        const auto ood_raw = synth_corpus(Genre::technical, 505, 300, 300);
        world.vocab = build_vocab(train_raw, 4096);
        world.train = tokenize_documents(train_raw, world.vocab);
        world.base = tokenize_documents(base_raw, world.vocab);
        world.base_alt = tokenize_documents(base_alt_raw, world.vocab);
        world.downstream = tokenize_documents(downstream_raw, world.vocab);
        world.ood = tokenize_documents(ood_raw, world.vocab);
        world.generator = NGramModel::train(world.train, 3, 0.0001, world.vocab.size(),
                                            world.vocab.content_hash());
        world.uniformish = NGramModel::train(world.base, 1, 0.1, world.vocab.size(),
                                             world.vocab.content_hash());
        return world;
    }();
    return w;
}

// Tiny deterministic model over a handful of ids, for exact checks.
inline NGramModel tiny_model(std::uint32_t vocab_size, int order = 1, double k = 0.1) {
    std::vector<TokenSeq> docs(1);
    for (TokenId v = 0; v < vocab_size; ++v) {
        for (int i = 0; i < 10; ++i) docs[0].ids.push_back(v);
    }
    return NGramModel::train(docs, order, k, vocab_size, 0);
}

}  // namespace wmlab::testing
