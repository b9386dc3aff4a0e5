#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wmlab/corpus.hpp"
#include "wmlab/rng.hpp"
#include "wmlab/vocab.hpp"

namespace wmlab {

using LogitVector = std::vector<double>;

// Interpolated add-k n-gram model.  The next-token distribution mixes
// add-k estimates of orders 1..n with fixed weights, so every token keeps
// positive probability and logits are plain log-probabilities.
class NGramModel {
public:
    static constexpr int kMaxOrder = 5;

    NGramModel() = default;

    static NGramModel train(const std::vector<TokenSeq>& docs, int order, double smoothing_k,
                            std::uint32_t vocab_size, std::uint64_t vocab_hash,
                            std::vector<double> interpolation_weights = {});

    int order() const noexcept { return order_; }
    double smoothing_k() const noexcept { return smoothing_k_; }
    std::uint32_t vocab_size() const noexcept { return vocab_size_; }
    std::uint64_t vocab_hash() const noexcept { return vocab_hash_; }
    const std::vector<double>& interpolation_weights() const noexcept { return weights_; }

    // Dense next-token probabilities / log-probabilities.
    std::vector<double> next_token_distribution(std::span<const TokenId> context) const;
    LogitVector next_token_logits(std::span<const TokenId> context) const;

    double token_prob(std::span<const TokenId> context, TokenId token) const;
    double perplexity(std::span<const TokenId> tokens) const;
    double sequence_log_prob(std::span<const TokenId> tokens) const;

    // Shannon entropy (nats) of the next-token distribution.
    double entropy(std::span<const TokenId> context) const;

    // Exact sample from the next-token distribution without materializing
    // it: picks an interpolation component, then a continuation inside it.
    TokenId propose(std::span<const TokenId> context, Rng& rng) const;

    void save(const std::string& path) const;
    static NGramModel load(const std::string& path, const Vocab& vocab);
    static NGramModel load(const std::string& path, std::uint64_t expected_vocab_hash);

private:
    struct ContextSlot {
        std::uint32_t begin = 0;
        std::uint32_t length = 0;
        std::uint64_t total = 0;
    };

    struct OrderTable {
        // Context key -> slot into the continuation arrays.
        std::unordered_map<std::uint64_t, std::uint32_t> index;
        std::vector<ContextSlot> slots;
        std::vector<TokenId> cont_ids;      // sorted within each slot
        std::vector<std::uint32_t> cont_cum;  // cumulative counts within each slot
        std::vector<std::uint64_t> sorted_keys;  // for deterministic serialization
    };

    static std::uint64_t pack_context(std::span<const TokenId> context);

    const ContextSlot* find_slot(int order, std::span<const TokenId> context) const;
    std::uint64_t count_in_slot(const OrderTable& table, const ContextSlot& slot, TokenId token) const;

    int order_ = 0;
    double smoothing_k_ = 0.0;
    std::uint32_t vocab_size_ = 0;
    std::uint64_t vocab_hash_ = 0;
    std::vector<double> weights_;

    // Order 1 is dense; orders 2..n are sparse tables.
    std::vector<std::uint64_t> unigram_counts_;
    std::vector<std::uint64_t> unigram_cum_;
    std::uint64_t unigram_total_ = 0;
    std::vector<OrderTable> higher_;  // higher_[i] is order i+2
};

// Samples from softmax((logits + bias) / temperature).  With no bias and
// unit temperature this is an exact draw from the model distribution that
// consumes the same random stream as NGramModel::propose.
TokenId sample_next(const NGramModel& model, std::span<const TokenId> context, double temperature,
                    const LogitVector* bias, Rng& rng);

// Plain autoregressive continuation of a prompt.
TokenSeq generate_text(const NGramModel& model, std::span<const TokenId> prompt,
                       std::size_t length, Rng& rng);

}  // namespace wmlab
