#pragma once

#include <vector>

#include "wmlab/ngram.hpp"
#include "wmlab/textgen.hpp"
#include "wmlab/watermark.hpp"

namespace wmlab::bench {

struct Fixture {
    Vocab vocab;
    std::vector<TokenSeq> train;
    std::vector<TokenSeq> prompts;
    NGramModel model;
};

inline const Fixture& fixture() {
    static const Fixture f = [] {
        Fixture fx;
        const auto train_raw = synth_corpus(Genre::story, 1, 1500, 320);
        const auto prompt_raw = synth_corpus(Genre::story, 2, 64, 320);
        fx.vocab = build_vocab(train_raw, 8192);
        fx.train = tokenize_documents(train_raw, fx.vocab);
        fx.prompts = tokenize_documents(prompt_raw, fx.vocab);
        fx.model = NGramModel::train(fx.train, 3, 0.1, fx.vocab.size(), fx.vocab.content_hash());
        return fx;
    }();
    return f;
}

inline SchemeOracle make_oracle(SchemeKind kind, double delta = 2.0) {
    SchemeSpec spec;
    spec.kind = kind;
    spec.params = {0.5, delta, 97};
    return SchemeOracle(spec, fixture().vocab.size());
}

}  // namespace wmlab::bench
