#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wmlab/corpus.hpp"
#include "wmlab/vocab.hpp"

namespace wmlab {

struct CalibrationOptions {
    std::uint32_t suppressed_top_tokens = 128;  // most frequent reference tokens
    double residual_gain = 0.12;                // pass-through for suppressed directions
    double anchor_gain = 0.8;                   // fixed-direction blend in the map input
};

// Seeded embedding geometry behind the semantic watermark schemes: one unit
// vector per token, one unit map row per token, plus a begin-of-text vector.
//
// An uncalibrated table maps a context embedding straight through, so the
// per-token scores react to any context change.  Calibrating against a
// reference corpus imitates a feature map fitted to that corpus: directions
// spanned by the reference's ubiquitous tokens (and the unknown token) are
// damped and a fixed anchor direction is blended in.  Context variation the
// reference corpus exhibits still moves the scores; variation concentrated
// on ubiquitous or unknown tokens barely does.
class EmbeddingTable {
public:
    EmbeddingTable(std::uint64_t seed, std::uint32_t vocab_size, std::uint32_t dim);

    std::uint32_t dim() const noexcept { return dim_; }
    std::uint32_t vocab_size() const noexcept { return vocab_size_; }
    bool calibrated() const noexcept { return !suppressed_basis_.empty(); }

    std::span<const double> token_vector(TokenId id) const;
    std::span<const double> map_row(TokenId id) const;
    std::span<const double> begin_vector() const noexcept { return begin_; }

    void calibrate(const std::vector<TokenSeq>& reference, TokenId unk_id,
                   const CalibrationOptions& options = {});

    // Mean of the last min(window, len) token vectors, renormalized; the
    // begin vector for an empty context.
    std::vector<double> context_embedding(std::span<const TokenId> context,
                                          std::uint32_t window) const;

    // Input actually fed to the map rows (identity when uncalibrated).
    std::vector<double> map_input(std::span<const double> raw_embedding) const;

    // map_input(context_embedding(...)) in one pass over precomputed
    // per-token images; the decoder/detector hot path.
    std::vector<double> mapped_context_input(std::span<const TokenId> context,
                                             std::uint32_t window) const;

    double row_score(TokenId id, std::span<const double> mapped) const;

private:
    void rebuild_mapped_vectors();

    std::uint32_t vocab_size_ = 0;
    std::uint32_t dim_ = 0;
    std::vector<double> token_vectors_;  // row-major |V| x d
    std::vector<double> map_rows_;       // row-major |V| x d
    std::vector<double> begin_;
    std::vector<double> anchor_;

    std::vector<double> suppressed_basis_;  // orthonormal rows, count x d
    double residual_gain_ = 1.0;
    double anchor_gain_ = 0.0;

    std::vector<double> mapped_vectors_;  // token vectors through the map
    std::vector<double> mapped_begin_;
};

double dot(std::span<const double> a, std::span<const double> b);
double cosine(std::span<const double> a, std::span<const double> b);
void normalize(std::span<double> v);

}  // namespace wmlab
