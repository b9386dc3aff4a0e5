#include "wmlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wmlab {

std::vector<SimilarityPair> similarity_scatter(std::span<const TokenSeq> contexts_a,
                                               std::span<const TokenSeq> contexts_b,
                                               const SchemeOracle& oracle, DomainTag tag) {
    if (contexts_a.size() != contexts_b.size()) {
        throw std::invalid_argument("similarity_scatter: context lists differ in length");
    }
    if (oracle.spec().kind != SchemeKind::sir_like) {
        throw std::invalid_argument("similarity_scatter: scheme is not the semantic one");
    }
    const EmbeddingTable& table = oracle.embeddings();
    const std::uint32_t window = oracle.spec().embed_window;
    const std::uint32_t vocab_size = oracle.vocab_size();

    std::vector<SimilarityPair> pairs;
    pairs.reserve(contexts_a.size());
    for (std::size_t i = 0; i < contexts_a.size(); ++i) {
        const std::vector<double> e1 = table.context_embedding(contexts_a[i].ids, window);
        const std::vector<double> e2 = table.context_embedding(contexts_b[i].ids, window);
        const std::vector<double> m1 = table.map_input(e1);
        const std::vector<double> m2 = table.map_input(e2);

        std::int64_t agree = 0;
        for (TokenId v = 0; v < vocab_size; ++v) {
            const bool g1 = table.row_score(v, m1) >= 0.0;
            const bool g2 = table.row_score(v, m2) >= 0.0;
            agree += (g1 == g2) ? 1 : -1;
        }

        SimilarityPair pair;
        pair.ctx_cosine = dot(e1, e2);
        pair.logit_cosine = static_cast<double>(agree) / static_cast<double>(vocab_size);
        pair.domain = tag;
        pairs.push_back(pair);
    }
    return pairs;
}

namespace {

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("spearman: length mismatch");
    if (xs.size() < 3) throw std::invalid_argument("spearman: need at least 3 points");

    const std::vector<double> rx = average_ranks(xs);
    const std::vector<double> ry = average_ranks(ys);
    const double n = static_cast<double>(xs.size());
    double mean = (n + 1.0) / 2.0;

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw std::runtime_error("spearman: undefined correlation");
    return sxy / std::sqrt(sxx * syy);
}

double interquartile_range(std::vector<double> values) {
    if (values.size() < 4) throw std::invalid_argument("interquartile_range: too few values");
    std::sort(values.begin(), values.end());
    auto quantile = [&](double p) {
        const double pos = p * static_cast<double>(values.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        if (lo + 1 >= values.size()) return values.back();
        return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
    };
    return quantile(0.75) - quantile(0.25);
}

std::pair<std::vector<TokenSeq>, std::vector<TokenSeq>> scatter_context_pairs(
    const std::vector<TokenSeq>& docs, std::size_t pairs, std::uint32_t window, Rng rng) {
    std::vector<const TokenSeq*> usable;
    for (const auto& d : docs) {
        if (d.ids.size() >= window) usable.push_back(&d);
    }
    if (usable.empty()) throw std::runtime_error("scatter: no document long enough for a window");

    auto random_window = [&]() {
        const TokenSeq& doc = *usable[rng.next_below(static_cast<std::uint32_t>(usable.size()))];
        const std::size_t pos = rng.next_below(static_cast<std::uint32_t>(doc.ids.size() - window + 1));
        TokenSeq ctx;
        ctx.ids.assign(doc.ids.begin() + static_cast<std::ptrdiff_t>(pos),
                       doc.ids.begin() + static_cast<std::ptrdiff_t>(pos + window));
        return ctx;
    };

    std::vector<TokenSeq> a, b;
    a.reserve(pairs);
    b.reserve(pairs);
    for (std::size_t i = 0; i < pairs; ++i) {
        TokenSeq ctx_a = random_window();
        TokenSeq ctx_b;
        if (rng.next_double() < 0.5) {
            ctx_b = ctx_a;
            const TokenSeq donor = random_window();
            for (std::size_t k = 0; k < ctx_b.ids.size(); ++k) {
                if (rng.next_double() < 0.5) ctx_b.ids[k] = donor.ids[k];
            }
        } else {
            ctx_b = random_window();
        }
        a.push_back(std::move(ctx_a));
        b.push_back(std::move(ctx_b));
    }
    return {std::move(a), std::move(b)};
}

ScatterSummary summarize_scatter(const std::vector<SimilarityPair>& pairs,
                                 std::uint32_t vocab_size) {
    ScatterSummary summary;
    std::vector<double> in_x, in_y;
    for (const auto& p : pairs) {
        if (p.domain == DomainTag::in_domain) {
            in_x.push_back(p.ctx_cosine);
            in_y.push_back(p.logit_cosine);
        }
    }
    summary.spearman_in_domain = spearman(in_x, in_y);

    const double noise_floor = 2.0 / std::sqrt(static_cast<double>(vocab_size));
    summary.iqr_ratio_max = 0.0;
    for (double lo = -1.0; lo < 0.9 - 1e-12; lo += 0.1) {
        std::vector<double> band_in, band_ood;
        for (const auto& p : pairs) {
            if (p.ctx_cosine < lo || p.ctx_cosine >= lo + 0.1) continue;
            (p.domain == DomainTag::in_domain ? band_in : band_ood).push_back(p.logit_cosine);
        }
        if (band_in.size() < 20 || band_ood.size() < 20) continue;
        const double iqr_in = interquartile_range(band_in);
        if (iqr_in < noise_floor) continue;  // no in-domain variation to compare against
        const double iqr_ood = interquartile_range(band_ood);
        summary.iqr_ratio_max = std::max(summary.iqr_ratio_max, iqr_ood / iqr_in);
        ++summary.matched_bands;
    }
    return summary;
}

}  // namespace wmlab
