#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wmlab/corpus.hpp"
#include "wmlab/embedding.hpp"
#include "wmlab/green_mask.hpp"
#include "wmlab/ngram.hpp"
#include "wmlab/rng.hpp"

namespace wmlab {

struct WatermarkParams {
    double gamma = 0.5;       // green fraction of the vocabulary
    double delta = 2.0;       // logit boost for green tokens
    std::uint64_t seed = 1;
};

enum class SchemeKind : std::uint8_t { unigram, kgw, sir_like, atw_like };

struct SchemeSpec {
    SchemeKind kind = SchemeKind::unigram;
    WatermarkParams params;
    std::uint32_t kgw_k = 1;          // context width of the hashed scheme
    std::uint32_t embed_dim = 160;    // semantic schemes
    std::uint32_t embed_window = 4;
};

SchemeKind scheme_kind_from_name(const std::string& name);
std::string scheme_name(SchemeKind kind);

// Fixed, context-independent green list: a keyed permutation of the ids
// where the first round(gamma * |V|) slots are green.
GreenMask unigram_mask(std::uint32_t vocab_size, const WatermarkParams& params);

// Green list re-derived from the last k context tokens.  Contexts shorter
// than k are left-padded with a reserved begin id before hashing.
GreenMask kgw_mask(std::span<const TokenId> context, std::uint32_t k,
                   const WatermarkParams& params, std::uint32_t vocab_size);

// Watermark bias of the semantic scheme: +delta where the map row scores
// the (mapped) context embedding non-negatively, -delta elsewhere.
LogitVector sir_bias_logits(std::span<const double> raw_embedding, const EmbeddingTable& table,
                            const WatermarkParams& params);

// Scaling watermark: mean-centered language-model logits are stretched by
// (1 + delta) wherever the map row scores the context non-negatively.
LogitVector atw_scaled_logits(const LogitVector& lm_logits, std::span<const double> raw_embedding,
                              const EmbeddingTable& table, const WatermarkParams& params);

// Green membership oracle for one decoding position.
class StepMask {
public:
    bool is_green(TokenId v) const;

    SchemeKind kind;
    double gamma = 0.5;
    double delta = 0.0;
    const GreenMask* fixed = nullptr;
    std::optional<SlotPermutation> perm;
    std::uint32_t green_slots = 0;
    std::vector<double> mapped;
    const EmbeddingTable* table = nullptr;
};

// Immutable runtime state of a watermarking scheme: the fixed mask or the
// embedding geometry, plus the position-level green oracle shared by the
// decoder and the detector.
class SchemeOracle {
public:
    SchemeOracle(const SchemeSpec& spec, std::uint32_t vocab_size);

    const SchemeSpec& spec() const noexcept { return spec_; }
    std::uint32_t vocab_size() const noexcept { return vocab_size_; }
    std::string id() const;

    bool uses_embeddings() const noexcept {
        return spec_.kind == SchemeKind::sir_like || spec_.kind == SchemeKind::atw_like;
    }
    const EmbeddingTable& embeddings() const;
    EmbeddingTable& mutable_embeddings();
    const GreenMask& fixed_mask() const;

    // Pins the semantic map to a reference corpus (see EmbeddingTable).
    void calibrate_embeddings(const std::vector<TokenSeq>& reference, TokenId unk_id,
                              const CalibrationOptions& options = {});

    StepMask step(std::span<const TokenId> context) const;

    // Materialized green set at a position; exhaustive, test/export use.
    GreenMask mask_at(std::span<const TokenId> context) const;

private:
    SchemeSpec spec_;
    std::uint32_t vocab_size_ = 0;
    GreenMask fixed_mask_;
    std::unique_ptr<EmbeddingTable> table_;
};

struct TaggedSeq {
    TokenSeq tokens;
    std::vector<std::uint8_t> green;  // per-position green bit of the emitted token
};

// Autoregressive decoding with the scheme's bias applied at every step.
// delta = 0 short-circuits to plain sampling, so the base and watermarked
// streams coincide draw for draw.
TaggedSeq generate_watermarked(const NGramModel& model, const SchemeOracle& oracle,
                               std::span<const TokenId> prompt, std::size_t length, Rng& rng);

// Dense next-token distribution under the scheme at one position; the
// enumerable counterpart of the sampler, used by oracle tests.
std::vector<double> watermarked_next_distribution(const NGramModel& model,
                                                  const SchemeOracle& oracle,
                                                  std::span<const TokenId> context);

// Occurrence-majority green mask over tagged generations; reference global
// mask for schemes without a fixed list.
GreenMask majority_green_mask(const std::vector<TaggedSeq>& docs, std::uint32_t vocab_size);

}  // namespace wmlab
