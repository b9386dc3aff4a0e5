#include "wmlab/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wmlab/rng.hpp"

namespace wmlab {

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    const double na = std::sqrt(dot(a, a));
    const double nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

void normalize(std::span<double> v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n == 0.0) return;
    for (double& x : v) x /= n;
}

namespace {

void fill_unit_vector(std::span<double> out, Rng rng) {
    for (double& x : out) x = rng.next_gaussian();
    normalize(out);
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::uint64_t seed, std::uint32_t vocab_size, std::uint32_t dim)
    : vocab_size_(vocab_size), dim_(dim) {
    if (dim < 2) throw std::invalid_argument("embedding: dim must be >= 2");
    if (vocab_size == 0) throw std::invalid_argument("embedding: empty vocab");

    token_vectors_.resize(static_cast<std::size_t>(vocab_size) * dim);
    map_rows_.resize(static_cast<std::size_t>(vocab_size) * dim);
    for (std::uint32_t v = 0; v < vocab_size; ++v) {
        fill_unit_vector({token_vectors_.data() + static_cast<std::size_t>(v) * dim, dim},
                         Rng(seed_stream(seed, "embed.token", v)));
        fill_unit_vector({map_rows_.data() + static_cast<std::size_t>(v) * dim, dim},
                         Rng(seed_stream(seed, "embed.row", v)));
    }
    begin_.resize(dim);
    fill_unit_vector(begin_, Rng(seed_stream(seed, "embed.begin", 0)));
    anchor_.resize(dim);
    fill_unit_vector(anchor_, Rng(seed_stream(seed, "embed.anchor", 0)));
    rebuild_mapped_vectors();
}

std::span<const double> EmbeddingTable::token_vector(TokenId id) const {
    if (id >= vocab_size_) throw std::out_of_range("embedding: token id out of range");
    return {token_vectors_.data() + static_cast<std::size_t>(id) * dim_, dim_};
}

std::span<const double> EmbeddingTable::map_row(TokenId id) const {
    if (id >= vocab_size_) throw std::out_of_range("embedding: token id out of range");
    return {map_rows_.data() + static_cast<std::size_t>(id) * dim_, dim_};
}

void EmbeddingTable::calibrate(const std::vector<TokenSeq>& reference, TokenId unk_id,
                               const CalibrationOptions& options) {
    const TokenFrequencies freq = token_frequencies(reference, vocab_size_);

    std::vector<TokenId> ranked(vocab_size_);
    for (std::uint32_t v = 0; v < vocab_size_; ++v) ranked[v] = v;
    std::sort(ranked.begin(), ranked.end(), [&](TokenId a, TokenId b) {
        if (freq.counts[a] != freq.counts[b]) return freq.counts[a] > freq.counts[b];
        return a < b;
    });

    std::vector<TokenId> suppressed;
    suppressed.push_back(unk_id);
    for (TokenId v : ranked) {
        if (suppressed.size() >= options.suppressed_top_tokens + 1) break;
        if (v != unk_id) suppressed.push_back(v);
    }

    // Gram-Schmidt over the suppressed token directions.
    suppressed_basis_.clear();
    for (TokenId v : suppressed) {
        std::vector<double> w(token_vector(v).begin(), token_vector(v).end());
        const std::size_t rows = suppressed_basis_.size() / dim_;
        for (std::size_t r = 0; r < rows; ++r) {
            std::span<const double> basis(suppressed_basis_.data() + r * dim_, dim_);
            const double proj = dot(w, basis);
            for (std::uint32_t i = 0; i < dim_; ++i) w[i] -= proj * basis[i];
        }
        double norm = std::sqrt(dot(w, w));
        if (norm < 1e-9) continue;  // direction already covered
        for (double& x : w) x /= norm;
        suppressed_basis_.insert(suppressed_basis_.end(), w.begin(), w.end());
    }
    residual_gain_ = options.residual_gain;
    anchor_gain_ = options.anchor_gain;
    rebuild_mapped_vectors();
}

void EmbeddingTable::rebuild_mapped_vectors() {
    mapped_vectors_.assign(token_vectors_.begin(), token_vectors_.end());
    mapped_begin_.assign(begin_.begin(), begin_.end());
    const std::size_t rows = suppressed_basis_.size() / dim_;
    auto damp = [&](double* vec) {
        for (std::size_t r = 0; r < rows; ++r) {
            std::span<const double> basis(suppressed_basis_.data() + r * dim_, dim_);
            double proj = 0.0;
            for (std::uint32_t i = 0; i < dim_; ++i) proj += vec[i] * basis[i];
            proj *= 1.0 - residual_gain_;
            for (std::uint32_t i = 0; i < dim_; ++i) vec[i] -= proj * basis[i];
        }
    };
    if (rows > 0) {
        for (std::uint32_t v = 0; v < vocab_size_; ++v) {
            damp(mapped_vectors_.data() + static_cast<std::size_t>(v) * dim_);
        }
        damp(mapped_begin_.data());
    }
}

std::vector<double> EmbeddingTable::mapped_context_input(std::span<const TokenId> context,
                                                         std::uint32_t window) const {
    std::vector<double> out(dim_, 0.0);
    double raw_norm_sq = 0.0;
    if (context.empty()) {
        out.assign(mapped_begin_.begin(), mapped_begin_.end());
        raw_norm_sq = 1.0;
    } else {
        const std::size_t take = std::min<std::size_t>(window, context.size());
        std::vector<double> raw_sum(dim_, 0.0);
        for (std::size_t i = context.size() - take; i < context.size(); ++i) {
            const TokenId id = context[i];
            if (id >= vocab_size_) throw std::out_of_range("embedding: token id out of range");
            const double* mapped = mapped_vectors_.data() + static_cast<std::size_t>(id) * dim_;
            const double* raw = token_vectors_.data() + static_cast<std::size_t>(id) * dim_;
            for (std::uint32_t k = 0; k < dim_; ++k) {
                out[k] += mapped[k];
                raw_sum[k] += raw[k];
            }
        }
        for (double x : raw_sum) raw_norm_sq += x * x;
    }
    const double raw_norm = std::sqrt(raw_norm_sq);
    if (raw_norm > 0.0) {
        for (double& x : out) x /= raw_norm;
    }
    for (std::uint32_t k = 0; k < dim_; ++k) out[k] += anchor_gain_ * anchor_[k];
    normalize(out);
    return out;
}

std::vector<double> EmbeddingTable::context_embedding(std::span<const TokenId> context,
                                                      std::uint32_t window) const {
    if (context.empty()) {
        return {begin_.begin(), begin_.end()};
    }
    const std::size_t take = std::min<std::size_t>(window, context.size());
    std::vector<double> mean(dim_, 0.0);
    for (std::size_t i = context.size() - take; i < context.size(); ++i) {
        const auto vec = token_vector(context[i]);
        for (std::uint32_t k = 0; k < dim_; ++k) mean[k] += vec[k];
    }
    for (double& x : mean) x /= static_cast<double>(take);
    normalize(mean);
    return mean;
}

std::vector<double> EmbeddingTable::map_input(std::span<const double> raw_embedding) const {
    if (raw_embedding.size() != dim_) throw std::invalid_argument("embedding: dimension mismatch");
    std::vector<double> out(raw_embedding.begin(), raw_embedding.end());
    if (!calibrated()) return out;

    const std::size_t rows = suppressed_basis_.size() / dim_;
    for (std::size_t r = 0; r < rows; ++r) {
        std::span<const double> basis(suppressed_basis_.data() + r * dim_, dim_);
        const double proj = dot(out, basis) * (1.0 - residual_gain_);
        for (std::uint32_t i = 0; i < dim_; ++i) out[i] -= proj * basis[i];
    }
    for (std::uint32_t i = 0; i < dim_; ++i) out[i] += anchor_gain_ * anchor_[i];
    normalize(out);
    return out;
}

double EmbeddingTable::row_score(TokenId id, std::span<const double> mapped) const {
    return dot(map_row(id), mapped);
}

}  // namespace wmlab
