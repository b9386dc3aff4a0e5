#pragma once

#include <string>
#include <vector>

#include "wmlab/analysis.hpp"
#include "wmlab/attack.hpp"
#include "wmlab/config.hpp"
#include "wmlab/estimator.hpp"

namespace wmlab {

struct SchemeReport {
    std::string name;
    double null_z_mean = 0.0;
    double no_attack_ewd_tpr1 = 0.0;   // entropy-weighted detector, no attack
    double no_attack_z_tpr1 = 0.0;     // plain z detector, no attack
    double biased_ewd_tpr1 = 1.0;      // entropy-weighted, strongest biased attack
    std::vector<BudgetPoint> budget_curve;          // medians across seeds
    std::vector<AttackEvalRow> attack_rows;         // medians across seeds
    std::vector<AttackEvalRow> transfer_rows;       // downstream_b, when configured
    GreenMask truth_mask;      // fixed list, or occurrence-majority reference
    GreenMask estimated_mask;  // first seed, largest budget
};

struct ExperimentReport {
    std::string config_echo;
    std::uint64_t config_hash = 0;
    std::vector<SchemeReport> schemes;
    std::vector<SimilarityPair> scatter;
    ScatterSummary scatter_summary;
    std::vector<std::string> assertion_failures;
};

// Runs the whole experiment: corpora -> models -> watermarked generation ->
// estimation -> attacks -> detection -> analysis, writing every artifact
// under out_dir.  Identical config (and seed) reruns are byte-identical.
ExperimentReport run_pipeline(const ExperimentConfig& config, const std::string& out_dir);

}  // namespace wmlab
