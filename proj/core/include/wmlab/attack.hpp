#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wmlab/corpus.hpp"
#include "wmlab/detector.hpp"
#include "wmlab/green_mask.hpp"
#include "wmlab/ngram.hpp"

namespace wmlab {

// Copy-or-resample paraphraser with an optional inverse watermark signal.
// diversity is the per-token resampling probability; resampled tokens come
// from the paraphraser model conditioned on the paraphrase so far, with
//   +fidelity        on source content tokens the paraphrase has not yet
//                    covered (keeps the rewrite about the same things),
//   -novelty_penalty on content tokens foreign to the source (faithful
//                    rewrites rarely introduce new content words), and
//   -bias_delta      on tokens of the estimated green list.
// When a mask is supplied, the copy budget is additionally spent on tokens
// the attacker believes are red, keeping the expected copy share at
// (1 - diversity).  fidelity = 0 makes the resampler source-blind.
struct AttackConfig {
    double diversity = 0.6;
    double bias_delta = 0.0;
    double fidelity = 4.0;
    double novelty_penalty = 2.0;
    const GreenMask* estimated_mask = nullptr;
    const NGramModel* paraphraser = nullptr;
    const std::vector<bool>* stopwords = nullptr;  // needed when fidelity > 0
    std::uint64_t seed = 0;
};

struct AttackOutcome {
    TokenSeq paraphrase;
    double overlap = 0.0;
    double oracle_ppl = 0.0;
    DetectionResult detection;
};

TokenSeq paraphrase(const TokenSeq& source, const AttackConfig& config, Rng& rng);

// Paraphrase one document and score the result: overlap with the source,
// oracle perplexity, and detection against the scheme.
AttackOutcome attack_document(const TokenSeq& source, const AttackConfig& config,
                              const SchemeOracle& oracle, const NGramModel& oracle_lm,
                              const std::vector<bool>& stopwords, Rng& rng);

// Flags of the top-n most frequent token ids; the stopword set of the
// overlap metric and of the fidelity prior.
std::vector<bool> stopword_flags(const TokenFrequencies& freq, std::uint32_t top_n = 50);

// Jaccard similarity of the multisets of non-stopword token ids.
double overlap_score(const TokenSeq& source, const TokenSeq& candidate,
                     const std::vector<bool>& stopwords);

struct AttackEvalRow {
    std::string scheme;
    std::string attack;
    double tpr_1 = 0.0;
    double tpr_10 = 0.0;
    double overlap_median = 0.0;
    double ppl_median = 0.0;
};

struct SchemeEvalInput {
    const SchemeOracle* oracle = nullptr;
    const std::vector<TokenSeq>* watermarked_docs = nullptr;
};

struct NamedAttack {
    std::string name;                     // "none" runs detection only
    std::optional<AttackConfig> config;
};

// One row per (scheme, attack): detection rates after the attack plus
// content-preservation and quality medians.
std::vector<AttackEvalRow> run_attack_eval(std::span<const SchemeEvalInput> schemes,
                                           std::span<const NamedAttack> attacks,
                                           const std::vector<TokenSeq>& null_docs,
                                           const NGramModel& oracle_lm, unsigned workers = 0);

double median(std::vector<double> values);

}  // namespace wmlab
