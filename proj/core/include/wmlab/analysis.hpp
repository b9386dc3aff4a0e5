#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wmlab/corpus.hpp"
#include "wmlab/watermark.hpp"

namespace wmlab {

enum class DomainTag : std::uint8_t { in_domain, out_of_domain };

struct SimilarityPair {
    double ctx_cosine = 0.0;
    double logit_cosine = 0.0;
    DomainTag domain = DomainTag::in_domain;
};

// For each context pair: cosine of the raw context embeddings against
// cosine of the scheme's watermark logit vectors.
std::vector<SimilarityPair> similarity_scatter(std::span<const TokenSeq> contexts_a,
                                               std::span<const TokenSeq> contexts_b,
                                               const SchemeOracle& oracle, DomainTag tag);

// Spearman rank correlation with average ranks on ties.
double spearman(std::span<const double> xs, std::span<const double> ys);

double interquartile_range(std::vector<double> values);

// Synthetic context pairs for the scatter: half are perturbed copies
// (sharing tokens), half independent windows, so pair cosines cover a wide
// band.
std::pair<std::vector<TokenSeq>, std::vector<TokenSeq>> scatter_context_pairs(
    const std::vector<TokenSeq>& docs, std::size_t pairs, std::uint32_t window, Rng rng);

struct ScatterSummary {
    double spearman_in_domain = 0.0;
    double iqr_ratio_max = 0.0;  // worst matched-band OOD/in-domain logit IQR
    std::size_t matched_bands = 0;
};

// Matched ctx-cosine bands of width 0.1 below 0.9.  A band qualifies when
// both domains have at least 20 pairs in it and the in-domain logit IQR
// rises above the statistic's resolution (the logit cosine averages |V|
// sign agreements, so spreads below ~2/sqrt(|V|) are indistinguishable
// from counting noise).
ScatterSummary summarize_scatter(const std::vector<SimilarityPair>& pairs,
                                 std::uint32_t vocab_size);

}  // namespace wmlab
