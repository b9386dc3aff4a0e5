#include "wmlab/attack.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "wmlab/parallel.hpp"

namespace wmlab {

std::vector<bool> stopword_flags(const TokenFrequencies& freq, std::uint32_t top_n) {
    const auto vocab_size = static_cast<std::uint32_t>(freq.rel_freq.size());
    std::vector<TokenId> ranked(vocab_size);
    std::iota(ranked.begin(), ranked.end(), 0u);
    std::sort(ranked.begin(), ranked.end(), [&](TokenId a, TokenId b) {
        if (freq.counts[a] != freq.counts[b]) return freq.counts[a] > freq.counts[b];
        return a < b;
    });
    std::vector<bool> flags(vocab_size, false);
    for (std::uint32_t i = 0; i < std::min(top_n, vocab_size); ++i) flags[ranked[i]] = true;
    return flags;
}

TokenSeq paraphrase(const TokenSeq& source, const AttackConfig& config, Rng& rng) {
    if (source.empty()) throw std::invalid_argument("paraphrase: empty source");
    if (!config.paraphraser) throw std::invalid_argument("paraphrase: no paraphraser model");
    if (!(config.diversity >= 0.0 && config.diversity <= 1.0)) {
        throw std::invalid_argument("paraphrase: diversity must be in [0,1]");
    }
    if (config.bias_delta < 0.0) throw std::invalid_argument("paraphrase: bias must be >= 0");
    const NGramModel& model = *config.paraphraser;
    const std::uint32_t vocab_size = model.vocab_size();
    if (config.estimated_mask && config.estimated_mask->size() != vocab_size) {
        throw std::invalid_argument("paraphrase: mask length mismatch");
    }
    if (config.fidelity > 0.0 && !config.stopwords) {
        throw std::invalid_argument("paraphrase: fidelity needs a stopword table");
    }

    // Remaining content multiset of the source document: the fidelity
    // prior boosts a source token only while the paraphrase has reused it
    // fewer times than the source contains it, spreading reuse across the
    // document instead of collapsing onto a few words.
    std::vector<std::uint32_t> remaining(config.fidelity > 0.0 ? vocab_size : 0, 0);
    if (config.fidelity > 0.0) {
        for (TokenId id : source.ids) {
            if (id < vocab_size && !(*config.stopwords)[id]) ++remaining[id];
        }
    }

    // exp(fidelity * uncovered_source - novelty * foreign_content - bias * green),
    // eight values over (source, foreign-content, green).
    double mult[2][2][2];
    for (int src = 0; src < 2; ++src) {
        for (int foreign = 0; foreign < 2; ++foreign) {
            for (int green = 0; green < 2; ++green) {
                mult[src][foreign][green] = std::exp(config.fidelity * src -
                                                     config.novelty_penalty * foreign -
                                                     config.bias_delta * green);
            }
        }
    }
    const bool plain_resample = config.fidelity == 0.0 && (config.bias_delta == 0.0 || !config.estimated_mask);

    TokenSeq out;
    out.source_label = SourceLabel::attacked;
    out.ids.reserve(source.ids.size());

    auto consume = [&](TokenId id) {
        if (!remaining.empty() && remaining[id] > 0) --remaining[id];
    };

    // With a mask in hand the attacker spends its copy budget on tokens it
    // believes are red and rewrites suspected green ones, keeping the
    // expected copy share at (1 - diversity).
    double copy_scale_green = 1.0, copy_scale_red = 1.0;
    if (config.estimated_mask && config.bias_delta > 0.0 && config.diversity > 0.0 &&
        config.diversity < 1.0) {
        std::size_t green_src = 0;
        for (TokenId id : source.ids) {
            if (config.estimated_mask->is_green(id)) ++green_src;
        }
        const double s_green = static_cast<double>(green_src) / static_cast<double>(source.ids.size());
        if (s_green > 0.0 && s_green < 1.0) {
            copy_scale_red = std::min(1.0 / (1.0 - config.diversity),  // keep probabilities valid
                                      1.0 / (1.0 - s_green));
            copy_scale_green = std::max(0.0, (1.0 - (1.0 - s_green) * copy_scale_red) / s_green);
        }
    }

    for (std::size_t i = 0; i < source.ids.size(); ++i) {
        double copy_prob = 1.0 - config.diversity;
        if (copy_scale_red != 1.0 || copy_scale_green != 1.0) {
            const bool src_green = config.estimated_mask->is_green(source.ids[i]);
            copy_prob *= src_green ? copy_scale_green : copy_scale_red;
        }
        if (rng.next_double() < copy_prob) {
            out.ids.push_back(source.ids[i]);
            consume(source.ids[i]);
            continue;
        }
        if (plain_resample) {
            out.ids.push_back(model.propose(out.ids, rng));
            continue;
        }
        std::vector<double> probs = model.next_token_distribution(out.ids);
        // The fidelity boost only competes at slots that want content in
        // the first place; boosting source words into function-word slots
        // would pad the paraphrase with off-structure repeats.
        bool content_slot = false;
        if (!remaining.empty()) {
            double content_mass = 0.0;
            for (TokenId v = 0; v < vocab_size; ++v) {
                if (!(*config.stopwords)[v]) content_mass += probs[v];
            }
            content_slot = content_mass >= 0.3;
        }
        double total = 0.0;
        for (TokenId v = 0; v < vocab_size; ++v) {
            // Content the source does not (still) call for is down-weighted:
            // novel words and words already reused to their source count.
            const int src = content_slot && remaining[v] > 0 ? 1 : 0;
            const int foreign = !remaining.empty() && !src && !(*config.stopwords)[v] ? 1 : 0;
            const int green = config.estimated_mask && config.estimated_mask->is_green(v) ? 1 : 0;
            probs[v] *= mult[src][foreign][green];
            total += probs[v];
        }
        const double target = rng.next_double() * total;
        double acc = 0.0;
        TokenId pick = vocab_size - 1;
        for (TokenId v = 0; v < vocab_size; ++v) {
            acc += probs[v];
            if (target < acc) {
                pick = v;
                break;
            }
        }
        out.ids.push_back(pick);
        consume(pick);
    }
    return out;
}

double overlap_score(const TokenSeq& source, const TokenSeq& candidate,
                     const std::vector<bool>& stopwords) {
    if (source.empty() || candidate.empty()) throw std::invalid_argument("overlap: empty input");
    std::unordered_map<TokenId, std::pair<std::uint32_t, std::uint32_t>> counts;
    for (TokenId id : source.ids) {
        if (id < stopwords.size() && stopwords[id]) continue;
        ++counts[id].first;
    }
    for (TokenId id : candidate.ids) {
        if (id < stopwords.size() && stopwords[id]) continue;
        ++counts[id].second;
    }
    std::uint64_t inter = 0, uni = 0;
    for (const auto& [id, pair] : counts) {
        inter += std::min(pair.first, pair.second);
        uni += std::max(pair.first, pair.second);
    }
    if (uni == 0) return 1.0;  // both documents are all stopwords
    return static_cast<double>(inter) / static_cast<double>(uni);
}

AttackOutcome attack_document(const TokenSeq& source, const AttackConfig& config,
                              const SchemeOracle& oracle, const NGramModel& oracle_lm,
                              const std::vector<bool>& stopwords, Rng& rng) {
    AttackOutcome outcome;
    outcome.paraphrase = paraphrase(source, config, rng);
    outcome.overlap = overlap_score(source, outcome.paraphrase, stopwords);
    outcome.oracle_ppl = oracle_lm.perplexity(outcome.paraphrase.ids);
    outcome.detection = detect(outcome.paraphrase, oracle);
    return outcome;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty input");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<AttackEvalRow> run_attack_eval(std::span<const SchemeEvalInput> schemes,
                                           std::span<const NamedAttack> attacks,
                                           const std::vector<TokenSeq>& null_docs,
                                           const NGramModel& oracle_lm, unsigned workers) {
    if (null_docs.size() < 100) throw std::invalid_argument("run_attack_eval: need >= 100 null docs");
    std::vector<AttackEvalRow> rows;

    for (const SchemeEvalInput& scheme : schemes) {
        const SchemeOracle& oracle = *scheme.oracle;
        const std::vector<TokenSeq>& docs = *scheme.watermarked_docs;
        if (docs.size() < 100) throw std::invalid_argument("run_attack_eval: need >= 100 watermarked docs");

        std::vector<double> null_scores(null_docs.size());
        parallel_for(null_docs.size(), workers, [&](std::size_t i) {
            null_scores[i] = detect(null_docs[i], oracle).z;
        });

        for (const NamedAttack& attack : attacks) {
            std::vector<double> scores(docs.size());
            std::vector<double> overlaps(docs.size());
            std::vector<double> ppls(docs.size());

            parallel_for(docs.size(), workers, [&](std::size_t i) {
                if (!attack.config) {
                    scores[i] = detect(docs[i], oracle).z;
                    overlaps[i] = 1.0;
                    ppls[i] = oracle_lm.perplexity(docs[i].ids);
                    return;
                }
                const AttackConfig& cfg = *attack.config;
                const std::vector<bool> no_stopwords(cfg.stopwords ? 0 : oracle.vocab_size(), false);
                Rng rng(seed_stream(cfg.seed, "attack.doc", i));
                const AttackOutcome outcome = attack_document(
                    docs[i], cfg, oracle, oracle_lm,
                    cfg.stopwords ? *cfg.stopwords : no_stopwords, rng);
                scores[i] = outcome.detection.z;
                overlaps[i] = outcome.overlap;
                ppls[i] = outcome.oracle_ppl;
            });

            AttackEvalRow row;
            row.scheme = oracle.id();
            row.attack = attack.name;
            row.tpr_1 = tpr_at_fpr(scores, null_scores, 0.01);
            row.tpr_10 = tpr_at_fpr(scores, null_scores, 0.10);
            row.overlap_median = median(overlaps);
            row.ppl_median = median(ppls);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace wmlab
