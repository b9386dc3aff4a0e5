#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wmlab/corpus.hpp"
#include "wmlab/green_mask.hpp"
#include "wmlab/watermark.hpp"

namespace wmlab {

constexpr double kDefaultEstimationTau = 1e-6;

struct EstimateResult {
    std::vector<double> delta;  // per-token relative-frequency excess
    double tau = kDefaultEstimationTau;
    GreenMask predicted;
    std::uint64_t wtm_tokens_used = 0;
};

// Token v is predicted green iff wtm.rel_freq[v] - human.rel_freq[v] >= tau.
EstimateResult estimate_green_list(const TokenFrequencies& wtm, const TokenFrequencies& human,
                                   double tau = kDefaultEstimationTau);

enum class MetricWeighting : std::uint8_t { per_type, per_occurrence };

struct ClassificationMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double fpr = 0.0;
    double f1 = 0.0;
    MetricWeighting weighting = MetricWeighting::per_type;
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

ClassificationMetrics metrics_from_confusion(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn,
                                             std::uint64_t tn, MetricWeighting weighting);

// Per-type confusion over the whole vocabulary; green is the positive class.
ClassificationMetrics vanilla_f1(const GreenMask& predicted, const GreenMask& truth);

// Per-occurrence confusion over generated text; ground truth at each
// position is the scheme's green set at that position.
ClassificationMetrics generation_based_f1(const GreenMask& predicted, const SchemeOracle& oracle,
                                          std::span<const TokenSeq> generations);

struct BudgetPoint {
    std::uint64_t budget = 0;
    double vanilla = 0.0;
    double generation_based = 0.0;
};

// Estimates from growing prefixes of the watermarked corpus and scores the
// prediction both ways at each budget.
std::vector<BudgetPoint> f1_vs_budget(const std::vector<TokenSeq>& wtm_corpus,
                                      const TokenFrequencies& base_freq, const GreenMask& truth,
                                      const SchemeOracle& oracle,
                                      std::span<const TokenSeq> eval_generations,
                                      std::span<const std::uint64_t> budgets,
                                      double tau = kDefaultEstimationTau);

}  // namespace wmlab
