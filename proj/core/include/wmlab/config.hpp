#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wmlab/textgen.hpp"

namespace wmlab {

// Where a corpus comes from: a file of blank-line separated documents, or
// the seeded synthesizer ("synth:<genre>:docs=N,tokens=T,seed=S").
struct CorpusSource {
    enum class Kind : std::uint8_t { file, synthetic } kind = Kind::synthetic;
    std::string path;
    Genre genre = Genre::story;
    std::size_t docs = 0;
    std::size_t tokens = 0;
    std::uint64_t seed = 0;
    std::string spec_string;

    bool operator==(const CorpusSource& other) const noexcept {
        return spec_string == other.spec_string;
    }
};

CorpusSource parse_corpus_source(const std::string& text);
std::vector<std::string> materialize_corpus(const CorpusSource& source);

struct AssertionSpec {
    std::string key;    // e.g. "tpr1_max.unigram.biased_0.6"
    bool is_min = false;  // min bound vs max bound
    double bound = 0.0;
};

// Line-oriented `key = value` configuration with [section] headers.
// Unknown sections or keys are hard errors.
struct ExperimentConfig {
    // [corpus]
    CorpusSource train;
    CorpusSource base;
    CorpusSource downstream;
    std::optional<CorpusSource> downstream_b;
    CorpusSource ood;
    std::uint32_t vocab_size = 8192;

    // [lm]
    int generator_order = 3;
    int oracle_order = 4;
    int paraphraser_order = 3;
    double smoothing_k = 0.0001;

    // [watermark]
    std::vector<std::string> schemes = {"unigram", "kgw", "sir"};
    double gamma = 0.5;
    double delta = 2.0;
    std::uint32_t kgw_k = 1;
    std::uint32_t embed_dim = 160;
    std::uint32_t embed_window = 4;
    std::uint32_t calibration_top_tokens = 128;
    double calibration_residual = 0.12;
    double calibration_anchor = 0.8;

    // [detection]
    std::vector<double> fprs = {0.01, 0.10};
    std::size_t null_docs = 1000;

    // [estimation]
    std::vector<std::uint64_t> budgets = {50000, 100000, 200000, 500000, 1000000};
    double tau = 1e-6;

    // [attack]
    std::vector<double> diversities = {0.2, 0.6};
    double attack_bias = 7.0;
    double attack_fidelity = 12.0;
    double attack_novelty = 2.0;

    // [analysis]
    std::size_t scatter_pairs = 1000;

    // [run]
    std::uint64_t master_seed = 7;
    std::size_t eval_docs = 500;
    std::size_t prompt_tokens = 50;
    std::size_t completion_tokens = 200;
    unsigned seeds = 1;
    unsigned workers = 0;
    bool keep_texts = false;

    std::vector<AssertionSpec> assertions;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical serialization; its hash stamps every report row.
std::string config_echo(const ExperimentConfig& config);
std::uint64_t config_hash(const ExperimentConfig& config);

}  // namespace wmlab
