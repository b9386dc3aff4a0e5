#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wmlab/ngram.hpp"
#include "wmlab/watermark.hpp"

namespace wmlab {

struct DetectionResult {
    std::uint64_t total_tokens = 0;
    std::uint64_t green_count = 0;
    double z = 0.0;
    std::string scheme_id;
};

struct CalibratedThreshold {
    double score_cutoff = 0.0;
    double target_fpr = 0.0;
    std::size_t null_sample_size = 0;
};

// (green count, scored positions); every position is scored, re-deriving
// the scheme's green set from the preceding tokens of the document.
std::pair<std::uint64_t, std::uint64_t> count_green(const TokenSeq& tokens,
                                                    const SchemeOracle& oracle);

// One-proportion z statistic: (g - gamma*T) / sqrt(T * gamma * (1 - gamma)).
double z_score(std::uint64_t green, std::uint64_t total, double gamma);

DetectionResult detect(const TokenSeq& tokens, const SchemeOracle& oracle);

// Memoized next-token entropies of a scoring model.
class EntropyCache {
public:
    explicit EntropyCache(const NGramModel& model) : model_(&model) {}
    double at(std::span<const TokenId> context);

private:
    const NGramModel* model_;
    std::unordered_map<std::uint64_t, double> memo_;
};

// Entropy-weighted score: positions where the scoring model is confident
// contribute little, high-entropy positions dominate.  Equal weights reduce
// it to the plain z statistic.
double ewd_score(const TokenSeq& tokens, EntropyCache& entropy, const SchemeOracle& oracle,
                 double gamma);

// Same statistic with caller-supplied per-position weights.
double ewd_score_weighted(const TokenSeq& tokens, std::span<const double> weights,
                          const SchemeOracle& oracle, double gamma);

// Empirical (1 - fpr) quantile of null scores, ties resolved upward so the
// realized false positive rate never exceeds the target on the sample.
CalibratedThreshold calibrate_threshold(std::vector<double> null_scores, double target_fpr);

double tpr_at_fpr(std::span<const double> pos_scores, std::span<const double> null_scores,
                  double target_fpr);

}  // namespace wmlab
