#include "wmlab/watermark.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wmlab {

namespace {

// Domain-separation salts for the keyed permutations; fixed constants so
// masks reproduce bit-exactly across implementations.
constexpr std::uint64_t kUnigramSalt = 0x756E696772616Dull;
constexpr std::uint64_t kKgwSalt = 0x6B67772D6B6579ull;
constexpr std::uint64_t kBeginId = 0xFFFFFFFFull;

std::uint32_t green_slot_count(double gamma, std::uint32_t vocab_size) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("watermark: gamma must be in (0,1)");
    if (vocab_size < 2) throw std::invalid_argument("watermark: vocab too small");
    const auto m = static_cast<std::uint32_t>(std::llround(gamma * static_cast<double>(vocab_size)));
    if (m == 0 || m >= vocab_size) throw std::runtime_error("watermark: degenerate partition");
    return m;
}

std::uint64_t kgw_key(std::span<const TokenId> context, std::uint32_t k, std::uint64_t seed) {
    std::uint64_t key = mix64(seed, kKgwSalt);
    // Hash exactly k ids, left-padding short contexts with the begin id.
    for (std::uint32_t i = k; i > 0; --i) {
        const std::uint64_t id =
            i <= context.size() ? static_cast<std::uint64_t>(context[context.size() - i]) : kBeginId;
        key = mix64(key, id);
    }
    return key;
}

GreenMask mask_from_permutation(const SlotPermutation& perm, std::uint32_t vocab_size,
                                std::uint32_t green_slots) {
    GreenMask mask(vocab_size);
    for (TokenId v = 0; v < vocab_size; ++v) {
        if (perm.slot_of(v) < green_slots) mask.set_green(v);
    }
    return mask;
}

}  // namespace

SchemeKind scheme_kind_from_name(const std::string& name) {
    if (name == "unigram") return SchemeKind::unigram;
    if (name == "kgw") return SchemeKind::kgw;
    if (name == "sir") return SchemeKind::sir_like;
    if (name == "atw") return SchemeKind::atw_like;
    throw std::invalid_argument("unknown scheme: " + name);
}

std::string scheme_name(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::unigram: return "unigram";
        case SchemeKind::kgw: return "kgw";
        case SchemeKind::sir_like: return "sir";
        case SchemeKind::atw_like: return "atw";
    }
    return "unknown";
}

GreenMask unigram_mask(std::uint32_t vocab_size, const WatermarkParams& params) {
    const std::uint32_t m = green_slot_count(params.gamma, vocab_size);
    const SlotPermutation perm(mix64(params.seed, kUnigramSalt), vocab_size);
    return mask_from_permutation(perm, vocab_size, m);
}

GreenMask kgw_mask(std::span<const TokenId> context, std::uint32_t k,
                   const WatermarkParams& params, std::uint32_t vocab_size) {
    if (k < 1) throw std::invalid_argument("kgw: k must be >= 1");
    const std::uint32_t m = green_slot_count(params.gamma, vocab_size);
    const SlotPermutation perm(kgw_key(context, k, params.seed), vocab_size);
    return mask_from_permutation(perm, vocab_size, m);
}

LogitVector sir_bias_logits(std::span<const double> raw_embedding, const EmbeddingTable& table,
                            const WatermarkParams& params) {
    // The boost budget delta is split symmetrically across the sign rule,
    // so the green-red logit gap matches the additive list schemes.
    const std::vector<double> mapped = table.map_input(raw_embedding);
    LogitVector bias(table.vocab_size());
    for (TokenId v = 0; v < table.vocab_size(); ++v) {
        bias[v] = table.row_score(v, mapped) >= 0.0 ? 0.5 * params.delta : -0.5 * params.delta;
    }
    return bias;
}

LogitVector atw_scaled_logits(const LogitVector& lm_logits, std::span<const double> raw_embedding,
                              const EmbeddingTable& table, const WatermarkParams& params) {
    if (lm_logits.size() != table.vocab_size()) {
        throw std::invalid_argument("atw: logits length mismatch");
    }
    const std::vector<double> mapped = table.map_input(raw_embedding);
    double mean = 0.0;
    for (double l : lm_logits) mean += l;
    mean /= static_cast<double>(lm_logits.size());

    LogitVector out(lm_logits.size());
    for (TokenId v = 0; v < table.vocab_size(); ++v) {
        const double scale = table.row_score(v, mapped) >= 0.0 ? 1.0 + params.delta : 1.0;
        out[v] = (lm_logits[v] - mean) * scale;
    }
    return out;
}

bool StepMask::is_green(TokenId v) const {
    switch (kind) {
        case SchemeKind::unigram:
            return fixed->is_green(v);
        case SchemeKind::kgw:
            return perm->slot_of(v) < green_slots;
        case SchemeKind::sir_like:
        case SchemeKind::atw_like:
            return table->row_score(v, mapped) >= 0.0;
    }
    return false;
}

SchemeOracle::SchemeOracle(const SchemeSpec& spec, std::uint32_t vocab_size)
    : spec_(spec), vocab_size_(vocab_size) {
    if (spec_.params.delta < 0.0) throw std::invalid_argument("watermark: delta must be >= 0");
    switch (spec_.kind) {
        case SchemeKind::unigram:
            fixed_mask_ = unigram_mask(vocab_size, spec_.params);
            break;
        case SchemeKind::kgw:
            if (spec_.kgw_k < 1) throw std::invalid_argument("kgw: k must be >= 1");
            green_slot_count(spec_.params.gamma, vocab_size);  // validate now
            break;
        case SchemeKind::sir_like:
        case SchemeKind::atw_like:
            if (spec_.embed_window < 1) throw std::invalid_argument("watermark: window must be >= 1");
            table_ = std::make_unique<EmbeddingTable>(seed_stream(spec_.params.seed, "wm.embed", 0),
                                                      vocab_size, spec_.embed_dim);
            break;
    }
}

std::string SchemeOracle::id() const {
    if (spec_.kind == SchemeKind::kgw) return "kgw" + std::to_string(spec_.kgw_k);
    return scheme_name(spec_.kind);
}

const EmbeddingTable& SchemeOracle::embeddings() const {
    if (!table_) throw std::logic_error("scheme has no embedding table");
    return *table_;
}

EmbeddingTable& SchemeOracle::mutable_embeddings() {
    if (!table_) throw std::logic_error("scheme has no embedding table");
    return *table_;
}

const GreenMask& SchemeOracle::fixed_mask() const {
    if (spec_.kind != SchemeKind::unigram) throw std::logic_error("scheme has no fixed mask");
    return fixed_mask_;
}

void SchemeOracle::calibrate_embeddings(const std::vector<TokenSeq>& reference, TokenId unk_id,
                                        const CalibrationOptions& options) {
    mutable_embeddings().calibrate(reference, unk_id, options);
}

StepMask SchemeOracle::step(std::span<const TokenId> context) const {
    StepMask mask;
    mask.kind = spec_.kind;
    mask.gamma = spec_.params.gamma;
    mask.delta = spec_.params.delta;
    switch (spec_.kind) {
        case SchemeKind::unigram:
            mask.fixed = &fixed_mask_;
            break;
        case SchemeKind::kgw:
            mask.perm.emplace(kgw_key(context, spec_.kgw_k, spec_.params.seed), vocab_size_);
            mask.green_slots = green_slot_count(spec_.params.gamma, vocab_size_);
            break;
        case SchemeKind::sir_like:
        case SchemeKind::atw_like:
            mask.mapped = table_->mapped_context_input(context, spec_.embed_window);
            mask.table = table_.get();
            break;
    }
    return mask;
}

GreenMask SchemeOracle::mask_at(std::span<const TokenId> context) const {
    const StepMask step_mask = step(context);
    GreenMask mask(vocab_size_);
    for (TokenId v = 0; v < vocab_size_; ++v) {
        if (step_mask.is_green(v)) mask.set_green(v);
    }
    return mask;
}

TaggedSeq generate_watermarked(const NGramModel& model, const SchemeOracle& oracle,
                               std::span<const TokenId> prompt, std::size_t length, Rng& rng) {
    if (length < 1) throw std::invalid_argument("generate: length must be >= 1");
    if (model.vocab_size() != oracle.vocab_size()) {
        throw std::invalid_argument("generate: model and scheme vocab size differ");
    }
    const SchemeSpec& spec = oracle.spec();
    const double delta = spec.params.delta;

    TaggedSeq out;
    out.tokens.source_label = SourceLabel::watermarked;
    out.tokens.ids.reserve(length);
    out.green.reserve(length);

    std::vector<TokenId> window(prompt.begin(), prompt.end());

    // Red-proposal acceptance ratio of the additive schemes: the boosted
    // distribution is p(v) * m(v) / Z with a green-red multiplier gap of
    // e^delta for both the list schemes and the semantic scheme, so
    // rejection against the base proposal is exact.
    const double red_accept = std::exp(-delta);

    for (std::size_t step_index = 0; step_index < length; ++step_index) {
        const StepMask mask = oracle.step(window);
        TokenId next = 0;

        if (delta == 0.0) {
            next = model.propose(window, rng);
        } else if (spec.kind == SchemeKind::atw_like) {
            // Dense pass; single-precision transcendentals keep the
            // full-vocabulary rescaling affordable.
            const std::vector<double> probs = model.next_token_distribution(window);
            std::vector<float> logits(probs.size());
            double mean = 0.0;
            for (TokenId v = 0; v < probs.size(); ++v) {
                logits[v] = std::log(static_cast<float>(probs[v]));
                mean += logits[v];
            }
            mean /= static_cast<double>(probs.size());
            double total = 0.0;
            std::vector<float> scaled(probs.size());
            for (TokenId v = 0; v < probs.size(); ++v) {
                const float scale = mask.is_green(v) ? 1.0f + static_cast<float>(delta) : 1.0f;
                scaled[v] = std::exp((logits[v] - static_cast<float>(mean)) * scale);
                total += scaled[v];
            }
            const double target = rng.next_double() * total;
            double acc = 0.0;
            next = static_cast<TokenId>(probs.size() - 1);
            for (TokenId v = 0; v < probs.size(); ++v) {
                acc += scaled[v];
                if (target < acc) {
                    next = v;
                    break;
                }
            }
        } else {
            for (;;) {
                const TokenId candidate = model.propose(window, rng);
                if (mask.is_green(candidate) || rng.next_double() < red_accept) {
                    next = candidate;
                    break;
                }
            }
        }

        out.tokens.ids.push_back(next);
        out.green.push_back(mask.is_green(next) ? 1 : 0);
        window.push_back(next);
    }
    return out;
}

std::vector<double> watermarked_next_distribution(const NGramModel& model,
                                                  const SchemeOracle& oracle,
                                                  std::span<const TokenId> context) {
    std::vector<double> probs = model.next_token_distribution(context);
    const SchemeSpec& spec = oracle.spec();
    const double delta = spec.params.delta;
    if (delta == 0.0) return probs;  // multipliers are uniform: exactly the base

    const StepMask mask = oracle.step(context);
    if (spec.kind == SchemeKind::atw_like) {
        double mean = 0.0;
        for (double p : probs) mean += std::log(p);
        mean /= static_cast<double>(probs.size());
        double total = 0.0;
        for (TokenId v = 0; v < probs.size(); ++v) {
            const double scale = mask.is_green(v) ? 1.0 + delta : 1.0;
            probs[v] = std::exp((std::log(probs[v]) - mean) * scale);
            total += probs[v];
        }
        for (double& p : probs) p /= total;
        return probs;
    }

    const double green_mult = spec.kind == SchemeKind::sir_like ? std::exp(0.5 * delta) : std::exp(delta);
    const double red_mult = spec.kind == SchemeKind::sir_like ? std::exp(-0.5 * delta) : 1.0;
    double total = 0.0;
    for (TokenId v = 0; v < probs.size(); ++v) {
        probs[v] *= mask.is_green(v) ? green_mult : red_mult;
        total += probs[v];
    }
    for (double& p : probs) p /= total;
    return probs;
}

GreenMask majority_green_mask(const std::vector<TaggedSeq>& docs, std::uint32_t vocab_size) {
    std::vector<std::int64_t> balance(vocab_size, 0);
    for (const auto& doc : docs) {
        for (std::size_t i = 0; i < doc.tokens.ids.size(); ++i) {
            balance[doc.tokens.ids[i]] += doc.green[i] ? 1 : -1;
        }
    }
    GreenMask mask(vocab_size);
    for (TokenId v = 0; v < vocab_size; ++v) {
        if (balance[v] > 0) mask.set_green(v);
    }
    return mask;
}

}  // namespace wmlab
