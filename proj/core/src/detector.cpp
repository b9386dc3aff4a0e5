#include "wmlab/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wmlab {

std::pair<std::uint64_t, std::uint64_t> count_green(const TokenSeq& tokens,
                                                    const SchemeOracle& oracle) {
    if (tokens.empty()) throw std::invalid_argument("count_green: empty input");
    std::uint64_t green = 0;
    for (std::size_t i = 0; i < tokens.ids.size(); ++i) {
        const StepMask mask = oracle.step({tokens.ids.data(), i});
        if (mask.is_green(tokens.ids[i])) ++green;
    }
    return {green, tokens.ids.size()};
}

double z_score(std::uint64_t green, std::uint64_t total, double gamma) {
    if (total == 0) throw std::invalid_argument("z_score: zero tokens");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("z_score: gamma must be in (0,1)");
    const double t = static_cast<double>(total);
    return (static_cast<double>(green) - gamma * t) / std::sqrt(t * gamma * (1.0 - gamma));
}

DetectionResult detect(const TokenSeq& tokens, const SchemeOracle& oracle) {
    const auto [green, total] = count_green(tokens, oracle);
    DetectionResult result;
    result.total_tokens = total;
    result.green_count = green;
    result.z = z_score(green, total, oracle.spec().params.gamma);
    result.scheme_id = oracle.id();
    return result;
}

double EntropyCache::at(std::span<const TokenId> context) {
    const std::size_t usable = std::min(context.size(), static_cast<std::size_t>(model_->order() - 1));
    const auto tail = context.subspan(context.size() - usable);
    std::uint64_t key = mix64(0x454E54ull, usable);
    for (TokenId id : tail) key = mix64(key, id);
    const auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    const double h = model_->entropy(tail);
    memo_.emplace(key, h);
    return h;
}

double ewd_score_weighted(const TokenSeq& tokens, std::span<const double> weights,
                          const SchemeOracle& oracle, double gamma) {
    if (tokens.empty()) throw std::invalid_argument("ewd_score: empty input");
    if (weights.size() != tokens.ids.size()) throw std::invalid_argument("ewd_score: weight count");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("ewd_score: gamma must be in (0,1)");
    double green_weight = 0.0;
    double weight_sum = 0.0;
    double weight_sq = 0.0;
    for (std::size_t i = 0; i < tokens.ids.size(); ++i) {
        const double w = weights[i];
        const StepMask mask = oracle.step({tokens.ids.data(), i});
        if (mask.is_green(tokens.ids[i])) green_weight += w;
        weight_sum += w;
        weight_sq += w * w;
    }
    if (weight_sq == 0.0) throw std::runtime_error("ewd_score: degenerate entropy");
    return (green_weight - gamma * weight_sum) / std::sqrt(gamma * (1.0 - gamma) * weight_sq);
}

double ewd_score(const TokenSeq& tokens, EntropyCache& entropy, const SchemeOracle& oracle,
                 double gamma) {
    if (tokens.empty()) throw std::invalid_argument("ewd_score: empty input");
    std::vector<double> weights(tokens.ids.size());
    for (std::size_t i = 0; i < tokens.ids.size(); ++i) {
        weights[i] = entropy.at({tokens.ids.data(), i});
    }
    return ewd_score_weighted(tokens, weights, oracle, gamma);
}

CalibratedThreshold calibrate_threshold(std::vector<double> null_scores, double target_fpr) {
    if (null_scores.size() < 100) throw std::invalid_argument("calibrate_threshold: too few samples");
    if (!(target_fpr > 0.0 && target_fpr < 1.0)) {
        throw std::invalid_argument("calibrate_threshold: fpr must be in (0,1)");
    }
    std::sort(null_scores.begin(), null_scores.end());
    const std::size_t n = null_scores.size();
    const auto allowed_above =
        static_cast<std::size_t>(std::floor(static_cast<double>(n) * target_fpr + 1e-12));

    CalibratedThreshold threshold;
    threshold.target_fpr = target_fpr;
    threshold.null_sample_size = n;
    threshold.score_cutoff = null_scores[n - allowed_above - 1];
    return threshold;
}

double tpr_at_fpr(std::span<const double> pos_scores, std::span<const double> null_scores,
                  double target_fpr) {
    if (pos_scores.empty() || null_scores.empty()) {
        throw std::invalid_argument("tpr_at_fpr: empty score list");
    }
    const CalibratedThreshold threshold =
        calibrate_threshold({null_scores.begin(), null_scores.end()}, target_fpr);
    std::size_t hits = 0;
    for (double s : pos_scores) {
        if (s > threshold.score_cutoff) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(pos_scores.size());
}

}  // namespace wmlab
