#include "wmlab/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace wmlab {

namespace {

constexpr char kMagic[8] = {'W', 'M', 'L', 'A', 'B', 'N', 'G', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("ngram: truncated model file");
    return value;
}

}  // namespace

std::uint64_t NGramModel::pack_context(std::span<const TokenId> context) {
    // Ids fit 16 bits; every order has its own table, so the context
    // length is implicit and raw packing cannot collide.
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < context.size(); ++i) {
        key |= static_cast<std::uint64_t>(context[i] & 0xFFFFu) << (16 * i);
    }
    return key;
}

NGramModel NGramModel::train(const std::vector<TokenSeq>& docs, int order, double smoothing_k,
                             std::uint32_t vocab_size, std::uint64_t vocab_hash,
                             std::vector<double> interpolation_weights) {
    if (order < 1 || order > kMaxOrder) throw std::invalid_argument("ngram: order must be in [1, 5]");
    if (smoothing_k <= 0.0) throw std::invalid_argument("ngram: smoothing_k must be positive");
    if (vocab_size == 0) throw std::invalid_argument("ngram: empty vocab");

    if (interpolation_weights.empty()) {
        interpolation_weights.assign(static_cast<std::size_t>(order), 1.0 / order);
    }
    if (interpolation_weights.size() != static_cast<std::size_t>(order)) {
        throw std::invalid_argument("ngram: need one interpolation weight per order");
    }
    double wsum = 0.0;
    for (double w : interpolation_weights) {
        if (w < 0.0) throw std::invalid_argument("ngram: negative interpolation weight");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw std::invalid_argument("ngram: weights must sum to 1");

    NGramModel model;
    model.order_ = order;
    model.smoothing_k_ = smoothing_k;
    model.vocab_size_ = vocab_size;
    model.vocab_hash_ = vocab_hash;
    model.weights_ = std::move(interpolation_weights);

    model.unigram_counts_.assign(vocab_size, 0);
    for (const auto& doc : docs) {
        for (TokenId id : doc.ids) {
            if (id >= vocab_size) throw std::out_of_range("ngram: token id out of range");
            ++model.unigram_counts_[id];
            ++model.unigram_total_;
        }
    }
    if (model.unigram_total_ == 0) throw std::runtime_error("ngram: empty corpus");

    model.unigram_cum_.resize(vocab_size);
    std::uint64_t acc = 0;
    for (std::uint32_t v = 0; v < vocab_size; ++v) {
        acc += model.unigram_counts_[v];
        model.unigram_cum_[v] = acc;
    }

    model.higher_.resize(static_cast<std::size_t>(order > 1 ? order - 1 : 0));
    for (int o = 2; o <= order; ++o) {
        // Gather (context, continuation) pairs, then sort; run-length
        // encoding yields sorted contexts and sorted continuation lists in
        // one pass, which keeps serialization deterministic.
        std::vector<std::pair<std::uint64_t, TokenId>> grams;
        for (const auto& doc : docs) {
            const auto& ids = doc.ids;
            for (std::size_t i = static_cast<std::size_t>(o) - 1; i < ids.size(); ++i) {
                std::span<const TokenId> ctx(ids.data() + i - (o - 1), static_cast<std::size_t>(o - 1));
                grams.emplace_back(pack_context(ctx), ids[i]);
            }
        }
        std::sort(grams.begin(), grams.end());

        OrderTable& table = model.higher_[static_cast<std::size_t>(o - 2)];
        std::size_t i = 0;
        while (i < grams.size()) {
            const std::uint64_t key = grams[i].first;
            ContextSlot slot;
            slot.begin = static_cast<std::uint32_t>(table.cont_ids.size());
            std::uint64_t ctx_total = 0;
            while (i < grams.size() && grams[i].first == key) {
                const TokenId v = grams[i].second;
                std::uint32_t run = 0;
                while (i < grams.size() && grams[i].first == key && grams[i].second == v) {
                    ++run;
                    ++i;
                }
                ctx_total += run;
                if (ctx_total > 0xFFFFFFFFull) throw std::runtime_error("ngram: context count overflow");
                table.cont_ids.push_back(v);
                table.cont_cum.push_back(static_cast<std::uint32_t>(ctx_total));
            }
            slot.length = static_cast<std::uint32_t>(table.cont_ids.size()) - slot.begin;
            slot.total = ctx_total;
            table.index.emplace(key, static_cast<std::uint32_t>(table.slots.size()));
            table.sorted_keys.push_back(key);
            table.slots.push_back(slot);
        }
    }
    return model;
}

const NGramModel::ContextSlot* NGramModel::find_slot(int order,
                                                     std::span<const TokenId> context) const {
    const OrderTable& table = higher_[static_cast<std::size_t>(order - 2)];
    const auto it = table.index.find(pack_context(context));
    if (it == table.index.end()) return nullptr;
    return &table.slots[it->second];
}

std::uint64_t NGramModel::count_in_slot(const OrderTable& table, const ContextSlot& slot,
                                        TokenId token) const {
    const TokenId* begin = table.cont_ids.data() + slot.begin;
    const TokenId* end = begin + slot.length;
    const TokenId* pos = std::lower_bound(begin, end, token);
    if (pos == end || *pos != token) return 0;
    const std::size_t idx = slot.begin + static_cast<std::size_t>(pos - begin);
    const std::uint32_t hi = table.cont_cum[idx];
    const std::uint32_t lo = idx == slot.begin ? 0 : table.cont_cum[idx - 1];
    return hi - lo;
}

std::vector<double> NGramModel::next_token_distribution(std::span<const TokenId> context) const {
    const std::size_t usable = std::min(context.size(), static_cast<std::size_t>(order_ - 1));
    const int max_order = static_cast<int>(usable) + 1;

    double wsum = 0.0;
    for (int o = 1; o <= max_order; ++o) wsum += weights_[static_cast<std::size_t>(o - 1)];

    const double kv = smoothing_k_ * vocab_size_;
    const double w1 = weights_[0] / wsum;
    const double uni_denom = static_cast<double>(unigram_total_) + kv;

    std::vector<double> probs(vocab_size_);
    double const_term = 0.0;
    for (int o = 2; o <= max_order; ++o) {
        const double wo = weights_[static_cast<std::size_t>(o - 1)] / wsum;
        const auto ctx = context.subspan(context.size() - static_cast<std::size_t>(o - 1));
        const ContextSlot* slot = find_slot(o, ctx);
        const double total = slot ? static_cast<double>(slot->total) : 0.0;
        const double denom = total + kv;
        const_term += wo * smoothing_k_ / denom;
    }
    for (std::uint32_t v = 0; v < vocab_size_; ++v) {
        probs[v] = w1 * (static_cast<double>(unigram_counts_[v]) + smoothing_k_) / uni_denom +
                   const_term;
    }
    for (int o = 2; o <= max_order; ++o) {
        const double wo = weights_[static_cast<std::size_t>(o - 1)] / wsum;
        const auto ctx = context.subspan(context.size() - static_cast<std::size_t>(o - 1));
        const ContextSlot* slot = find_slot(o, ctx);
        if (!slot) continue;
        const OrderTable& table = higher_[static_cast<std::size_t>(o - 2)];
        const double denom = static_cast<double>(slot->total) + kv;
        for (std::uint32_t i = 0; i < slot->length; ++i) {
            const std::size_t idx = slot->begin + i;
            const std::uint32_t hi = table.cont_cum[idx];
            const std::uint32_t lo = i == 0 ? 0 : table.cont_cum[idx - 1];
            probs[table.cont_ids[idx]] += wo * static_cast<double>(hi - lo) / denom;
        }
    }
    return probs;
}

LogitVector NGramModel::next_token_logits(std::span<const TokenId> context) const {
    std::vector<double> probs = next_token_distribution(context);
    for (double& p : probs) p = std::log(p);
    return probs;
}

double NGramModel::token_prob(std::span<const TokenId> context, TokenId token) const {
    if (token >= vocab_size_) throw std::out_of_range("ngram: token id out of range");
    const std::size_t usable = std::min(context.size(), static_cast<std::size_t>(order_ - 1));
    const int max_order = static_cast<int>(usable) + 1;

    double wsum = 0.0;
    for (int o = 1; o <= max_order; ++o) wsum += weights_[static_cast<std::size_t>(o - 1)];

    const double kv = smoothing_k_ * vocab_size_;
    double p = (weights_[0] / wsum) *
               (static_cast<double>(unigram_counts_[token]) + smoothing_k_) /
               (static_cast<double>(unigram_total_) + kv);
    for (int o = 2; o <= max_order; ++o) {
        const double wo = weights_[static_cast<std::size_t>(o - 1)] / wsum;
        const auto ctx = context.subspan(context.size() - static_cast<std::size_t>(o - 1));
        const ContextSlot* slot = find_slot(o, ctx);
        const OrderTable& table = higher_[static_cast<std::size_t>(o - 2)];
        const std::uint64_t c = slot ? count_in_slot(table, *slot, token) : 0;
        const double total = slot ? static_cast<double>(slot->total) : 0.0;
        p += wo * (static_cast<double>(c) + smoothing_k_) / (total + kv);
    }
    return p;
}

double NGramModel::sequence_log_prob(std::span<const TokenId> tokens) const {
    double log_p = 0.0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::size_t ctx_len = std::min(i, static_cast<std::size_t>(order_ - 1));
        log_p += std::log(token_prob(tokens.subspan(i - ctx_len, ctx_len), tokens[i]));
    }
    return log_p;
}

double NGramModel::perplexity(std::span<const TokenId> tokens) const {
    if (tokens.empty()) throw std::invalid_argument("perplexity: empty sequence");
    return std::exp(-sequence_log_prob(tokens) / static_cast<double>(tokens.size()));
}

double NGramModel::entropy(std::span<const TokenId> context) const {
    const std::vector<double> probs = next_token_distribution(context);
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

TokenId NGramModel::propose(std::span<const TokenId> context, Rng& rng) const {
    const std::size_t usable = std::min(context.size(), static_cast<std::size_t>(order_ - 1));
    const int max_order = static_cast<int>(usable) + 1;

    double wsum = 0.0;
    for (int o = 1; o <= max_order; ++o) wsum += weights_[static_cast<std::size_t>(o - 1)];

    // Component pick: order, then empirical-vs-smoothing part.  Exactly one
    // order draw, one part draw and one continuation draw per proposal.
    const double u_order = rng.next_double() * wsum;
    int o = max_order;
    double acc = 0.0;
    for (int cand = 1; cand <= max_order; ++cand) {
        acc += weights_[static_cast<std::size_t>(cand - 1)];
        if (u_order < acc) {
            o = cand;
            break;
        }
    }

    const double kv = smoothing_k_ * vocab_size_;
    const ContextSlot* slot = nullptr;
    double total = static_cast<double>(unigram_total_);
    if (o >= 2) {
        const auto ctx = context.subspan(context.size() - static_cast<std::size_t>(o - 1));
        slot = find_slot(o, ctx);
        total = slot ? static_cast<double>(slot->total) : 0.0;
    }

    const double u_part = rng.next_double();
    if (u_part >= total / (total + kv)) {
        return rng.next_below(vocab_size_);  // smoothing mass is uniform
    }

    if (o == 1) {
        std::uint64_t target = static_cast<std::uint64_t>(rng.next_double() * static_cast<double>(unigram_total_));
        if (target >= unigram_total_) target = unigram_total_ - 1;
        const auto it = std::upper_bound(unigram_cum_.begin(), unigram_cum_.end(), target);
        return static_cast<TokenId>(it - unigram_cum_.begin());
    }

    const OrderTable& table = higher_[static_cast<std::size_t>(o - 2)];
    std::uint32_t target = static_cast<std::uint32_t>(rng.next_double() * static_cast<double>(slot->total));
    if (target >= slot->total) target = static_cast<std::uint32_t>(slot->total - 1);
    const auto begin = table.cont_cum.begin() + slot->begin;
    const auto end = begin + slot->length;
    const auto it = std::upper_bound(begin, end, target);
    return table.cont_ids[static_cast<std::size_t>(it - table.cont_cum.begin())];
}

TokenId sample_next(const NGramModel& model, std::span<const TokenId> context, double temperature,
                    const LogitVector* bias, Rng& rng) {
    if (temperature <= 0.0) throw std::invalid_argument("sample_next: temperature must be positive");
    if (bias && bias->size() != model.vocab_size()) {
        throw std::invalid_argument("sample_next: bias length mismatch");
    }
    if (!bias && temperature == 1.0) {
        return model.propose(context, rng);
    }

    LogitVector x = model.next_token_logits(context);
    if (bias) {
        for (std::size_t v = 0; v < x.size(); ++v) x[v] += (*bias)[v];
    }
    double max_x = x[0];
    for (double xi : x) max_x = std::max(max_x, xi);
    double total = 0.0;
    for (double& xi : x) {
        xi = std::exp((xi - max_x) / temperature);
        total += xi;
    }
    const double target = rng.next_double() * total;
    double acc = 0.0;
    for (std::size_t v = 0; v < x.size(); ++v) {
        acc += x[v];
        if (target < acc) return static_cast<TokenId>(v);
    }
    return static_cast<TokenId>(x.size() - 1);
}

TokenSeq generate_text(const NGramModel& model, std::span<const TokenId> prompt,
                       std::size_t length, Rng& rng) {
    TokenSeq out;
    out.source_label = SourceLabel::human;
    std::vector<TokenId> window(prompt.begin(), prompt.end());
    out.ids.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
        const TokenId next = model.propose(window, rng);
        out.ids.push_back(next);
        window.push_back(next);
    }
    return out;
}

void NGramModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("ngram: cannot open for write: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kFormatVersion);
    write_pod(out, static_cast<std::uint32_t>(order_));
    write_pod(out, smoothing_k_);
    write_pod(out, vocab_size_);
    write_pod(out, vocab_hash_);
    for (double w : weights_) write_pod(out, w);
    for (std::uint64_t c : unigram_counts_) write_pod(out, c);
    for (int o = 2; o <= order_; ++o) {
        const OrderTable& table = higher_[static_cast<std::size_t>(o - 2)];
        write_pod(out, static_cast<std::uint64_t>(table.sorted_keys.size()));
        for (std::uint64_t key : table.sorted_keys) {
            const ContextSlot& slot = table.slots[table.index.at(key)];
            write_pod(out, key);
            write_pod(out, slot.length);
            for (std::uint32_t i = 0; i < slot.length; ++i) {
                const std::size_t idx = slot.begin + i;
                const std::uint32_t hi = table.cont_cum[idx];
                const std::uint32_t lo = i == 0 ? 0 : table.cont_cum[idx - 1];
                write_pod(out, table.cont_ids[idx]);
                write_pod(out, hi - lo);
            }
        }
    }
    if (!out) throw std::runtime_error("ngram: write failed: " + path);
}

NGramModel NGramModel::load(const std::string& path, const Vocab& vocab) {
    return load(path, vocab.content_hash());
}

NGramModel NGramModel::load(const std::string& path, std::uint64_t expected_vocab_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("ngram: cannot open: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("ngram: bad magic in " + path);
    }
    const auto version = read_pod<std::uint32_t>(in);
    if (version != kFormatVersion) throw std::runtime_error("ngram: unsupported format version");

    NGramModel model;
    model.order_ = static_cast<int>(read_pod<std::uint32_t>(in));
    model.smoothing_k_ = read_pod<double>(in);
    model.vocab_size_ = read_pod<std::uint32_t>(in);
    model.vocab_hash_ = read_pod<std::uint64_t>(in);
    if (model.vocab_hash_ != expected_vocab_hash) {
        throw std::runtime_error("ngram: vocab hash mismatch for " + path);
    }
    if (model.order_ < 1 || model.order_ > kMaxOrder) throw std::runtime_error("ngram: corrupt order");

    model.weights_.resize(static_cast<std::size_t>(model.order_));
    for (double& w : model.weights_) w = read_pod<double>(in);

    model.unigram_counts_.resize(model.vocab_size_);
    model.unigram_total_ = 0;
    for (auto& c : model.unigram_counts_) {
        c = read_pod<std::uint64_t>(in);
        model.unigram_total_ += c;
    }
    model.unigram_cum_.resize(model.vocab_size_);
    std::uint64_t acc = 0;
    for (std::uint32_t v = 0; v < model.vocab_size_; ++v) {
        acc += model.unigram_counts_[v];
        model.unigram_cum_[v] = acc;
    }

    model.higher_.resize(static_cast<std::size_t>(model.order_ > 1 ? model.order_ - 1 : 0));
    for (int o = 2; o <= model.order_; ++o) {
        OrderTable& table = model.higher_[static_cast<std::size_t>(o - 2)];
        const auto n_contexts = read_pod<std::uint64_t>(in);
        table.slots.reserve(n_contexts);
        for (std::uint64_t c = 0; c < n_contexts; ++c) {
            const auto key = read_pod<std::uint64_t>(in);
            const auto length = read_pod<std::uint32_t>(in);
            ContextSlot slot;
            slot.begin = static_cast<std::uint32_t>(table.cont_ids.size());
            slot.length = length;
            std::uint64_t ctx_total = 0;
            for (std::uint32_t i = 0; i < length; ++i) {
                const auto id = read_pod<TokenId>(in);
                const auto count = read_pod<std::uint32_t>(in);
                ctx_total += count;
                table.cont_ids.push_back(id);
                table.cont_cum.push_back(static_cast<std::uint32_t>(ctx_total));
            }
            slot.total = ctx_total;
            table.index.emplace(key, static_cast<std::uint32_t>(table.slots.size()));
            table.sorted_keys.push_back(key);
            table.slots.push_back(slot);
        }
    }
    return model;
}

}  // namespace wmlab
