#include "wmlab/estimator.hpp"

#include <stdexcept>

namespace wmlab {

EstimateResult estimate_green_list(const TokenFrequencies& wtm, const TokenFrequencies& human,
                                   double tau) {
    if (wtm.rel_freq.size() != human.rel_freq.size()) {
        throw std::invalid_argument("estimate_green_list: frequency length mismatch");
    }
    if (tau <= 0.0) throw std::invalid_argument("estimate_green_list: tau must be positive");

    const auto vocab_size = static_cast<std::uint32_t>(wtm.rel_freq.size());
    EstimateResult result;
    result.tau = tau;
    result.wtm_tokens_used = wtm.total_tokens;
    result.delta.resize(vocab_size);
    result.predicted = GreenMask(vocab_size);
    for (TokenId v = 0; v < vocab_size; ++v) {
        result.delta[v] = wtm.rel_freq[v] - human.rel_freq[v];
        if (result.delta[v] >= tau) result.predicted.set_green(v);
    }
    return result;
}

ClassificationMetrics metrics_from_confusion(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn,
                                             std::uint64_t tn, MetricWeighting weighting) {
    ClassificationMetrics m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.tn = tn;
    m.weighting = weighting;
    m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.fpr = (fp + tn) > 0 ? static_cast<double>(fp) / static_cast<double>(fp + tn) : 0.0;
    const double denom = m.precision + m.recall;
    m.f1 = denom > 0.0 ? 2.0 * m.precision * m.recall / denom : 0.0;
    return m;
}

ClassificationMetrics vanilla_f1(const GreenMask& predicted, const GreenMask& truth) {
    if (predicted.size() != truth.size()) throw std::invalid_argument("vanilla_f1: size mismatch");
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (TokenId v = 0; v < truth.size(); ++v) {
        const bool pred = predicted.is_green(v);
        const bool real = truth.is_green(v);
        if (pred && real) ++tp;
        else if (pred && !real) ++fp;
        else if (!pred && real) ++fn;
        else ++tn;
    }
    return metrics_from_confusion(tp, fp, fn, tn, MetricWeighting::per_type);
}

ClassificationMetrics generation_based_f1(const GreenMask& predicted, const SchemeOracle& oracle,
                                          std::span<const TokenSeq> generations) {
    if (generations.empty()) throw std::invalid_argument("generation_based_f1: no generations");
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (const TokenSeq& doc : generations) {
        for (std::size_t i = 0; i < doc.ids.size(); ++i) {
            const StepMask mask = oracle.step({doc.ids.data(), i});
            const bool real = mask.is_green(doc.ids[i]);
            const bool pred = predicted.is_green(doc.ids[i]);
            if (pred && real) ++tp;
            else if (pred && !real) ++fp;
            else if (!pred && real) ++fn;
            else ++tn;
        }
    }
    return metrics_from_confusion(tp, fp, fn, tn, MetricWeighting::per_occurrence);
}

std::vector<BudgetPoint> f1_vs_budget(const std::vector<TokenSeq>& wtm_corpus,
                                      const TokenFrequencies& base_freq, const GreenMask& truth,
                                      const SchemeOracle& oracle,
                                      std::span<const TokenSeq> eval_generations,
                                      std::span<const std::uint64_t> budgets, double tau) {
    for (std::size_t i = 1; i < budgets.size(); ++i) {
        if (budgets[i] < budgets[i - 1]) {
            throw std::invalid_argument("f1_vs_budget: budgets must be ascending");
        }
    }
    const auto vocab_size = static_cast<std::uint32_t>(base_freq.rel_freq.size());
    std::vector<BudgetPoint> points;
    points.reserve(budgets.size());
    for (std::uint64_t budget : budgets) {
        const TokenFrequencies wtm = token_frequencies_prefix(wtm_corpus, vocab_size, budget);
        const EstimateResult est = estimate_green_list(wtm, base_freq, tau);
        BudgetPoint point;
        point.budget = budget;
        point.vanilla = vanilla_f1(est.predicted, truth).f1;
        point.generation_based = generation_based_f1(est.predicted, oracle, eval_generations).f1;
        points.push_back(point);
    }
    return points;
}

}  // namespace wmlab
