#include "wmlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wmlab/csv.hpp"
#include "wmlab/detector.hpp"
#include "wmlab/parallel.hpp"

namespace wmlab {

namespace {

namespace fs = std::filesystem;

[[noreturn]] void stage_fail(const std::string& stage, const std::string& what) {
    throw std::runtime_error("stage " + stage + ": " + what);
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path.string());
    return out;
}

std::vector<std::span<const TokenId>> make_prompts(const std::vector<TokenSeq>& docs,
                                                   std::size_t count, std::size_t prompt_tokens,
                                                   const std::string& stage) {
    std::vector<std::span<const TokenId>> prompts;
    prompts.reserve(count);
    if (docs.empty()) stage_fail(stage, "empty prompt corpus");
    for (std::size_t i = 0; i < count; ++i) {
        const TokenSeq& doc = docs[i % docs.size()];
        if (doc.ids.size() < prompt_tokens) stage_fail(stage, "document too short for prompt");
        prompts.emplace_back(doc.ids.data(), prompt_tokens);
    }
    return prompts;
}

std::vector<TaggedSeq> generate_docs(const NGramModel& model, const SchemeOracle& oracle,
                                     const std::vector<std::span<const TokenId>>& prompts,
                                     std::size_t completion, std::uint64_t master,
                                     const std::string& label, std::uint64_t rep,
                                     unsigned workers) {
    std::vector<TaggedSeq> docs(prompts.size());
    parallel_for(prompts.size(), workers, [&](std::size_t i) {
        Rng rng(seed_stream(master, label, rep * prompts.size() + i));
        docs[i] = generate_watermarked(model, oracle, prompts[i], completion, rng);
    });
    return docs;
}

std::vector<TokenSeq> strip_tags(const std::vector<TaggedSeq>& docs) {
    std::vector<TokenSeq> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(d.tokens);
    return out;
}

double median_of(std::vector<double> v) { return median(std::move(v)); }

struct RepOutcome {
    std::vector<BudgetPoint> budget_curve;
    std::vector<AttackEvalRow> attack_rows;
    std::vector<AttackEvalRow> transfer_rows;
    double null_z_mean = 0.0;
    double no_attack_z_tpr1 = 0.0;
    double no_attack_ewd_tpr1 = 0.0;
    double biased_ewd_tpr1 = 1.0;
    GreenMask truth_mask;
    GreenMask estimated_mask;
    std::vector<double> est_delta;
    std::vector<std::uint64_t> est_occurrences;
};

}  // namespace

ExperimentReport run_pipeline(const ExperimentConfig& config, const std::string& out_dir) {
    ExperimentReport report;
    report.config_echo = config_echo(config);
    report.config_hash = config_hash(config);

    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    {
        auto f = open_out(out / "config.txt");
        f << report.config_echo;
        char hash_buf[32];
        std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                      static_cast<unsigned long long>(report.config_hash));
        f << "config_hash = " << hash_buf << "\n";
    }

    // ---- corpus stage ------------------------------------------------
    Vocab vocab;
    std::vector<TokenSeq> train_tok, base_tok, downstream_tok, downstream_b_tok, ood_tok;
    TokenFrequencies base_freq;
    std::vector<bool> stopwords;
    std::vector<TokenSeq> null_docs;
    try {
        const std::vector<std::string> train_raw = materialize_corpus(config.train);
        const std::vector<std::string> base_raw = materialize_corpus(config.base);
        const std::vector<std::string> downstream_raw = materialize_corpus(config.downstream);
        const std::vector<std::string> ood_raw = materialize_corpus(config.ood);

        vocab = build_vocab(train_raw, config.vocab_size);
        vocab.save((out / "vocab.txt").string());

        train_tok = tokenize_documents(train_raw, vocab);
        base_tok = tokenize_documents(base_raw, vocab);
        downstream_tok = tokenize_documents(downstream_raw, vocab);
        ood_tok = tokenize_documents(ood_raw, vocab);
        if (config.downstream_b) {
            downstream_b_tok = tokenize_documents(materialize_corpus(*config.downstream_b), vocab);
        }

        base_freq = token_frequencies(base_tok, vocab.size());
        stopwords = stopword_flags(base_freq, 50);
        {
            auto f = open_out(out / "freq_base.csv");
            f << "token_id,token,rel_freq,count\n";
            for (TokenId v = 0; v < vocab.size(); ++v) {
                f << v << "," << csv_field(vocab.token_of(v)) << "," << fmt_g9(base_freq.rel_freq[v]) << ","
                  << base_freq.counts[v] << "\n";
            }
        }

        // Human null documents: the continuation window of downstream docs,
        // i.e. text the prompts' own source would have written.
        if (downstream_tok.size() < config.null_docs) {
            stage_fail("corpus", "downstream corpus has too few documents for the null sample");
        }
        for (std::size_t i = 0; i < config.null_docs; ++i) {
            const auto& ids = downstream_tok[i].ids;
            if (ids.size() < config.prompt_tokens + config.completion_tokens) {
                stage_fail("corpus", "downstream document too short for prompt + continuation");
            }
            TokenSeq doc;
            doc.source_label = SourceLabel::human;
            doc.ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(config.prompt_tokens),
                           ids.begin() + static_cast<std::ptrdiff_t>(config.prompt_tokens +
                                                                     config.completion_tokens));
            null_docs.push_back(std::move(doc));
        }
    } catch (const std::exception& e) {
        stage_fail("corpus", e.what());
    }

    // ---- lm stage ------------------------------------------------------
    NGramModel generator, oracle_lm, paraphraser;
    try {
        generator = NGramModel::train(train_tok, config.generator_order, config.smoothing_k,
                                      vocab.size(), vocab.content_hash());
        oracle_lm = NGramModel::train(base_tok, config.oracle_order, config.smoothing_k,
                                      vocab.size(), vocab.content_hash());
        paraphraser = NGramModel::train(base_tok, config.paraphraser_order, config.smoothing_k,
                                        vocab.size(), vocab.content_hash());
        generator.save((out / "model_generator.bin").string());
        oracle_lm.save((out / "model_oracle.bin").string());
        paraphraser.save((out / "model_paraphraser.bin").string());
    } catch (const std::exception& e) {
        stage_fail("lm", e.what());
    }

    EntropyCache entropy(oracle_lm);
    const std::uint64_t max_budget =
        config.budgets.empty() ? 0 : *std::max_element(config.budgets.begin(), config.budgets.end());

    // ---- per-scheme stages ----------------------------------------------
    for (const std::string& scheme_name : config.schemes) {
        const std::string stage = "scheme:" + scheme_name;
        std::vector<RepOutcome> reps;
        std::string scheme_id;
        try {
            for (unsigned rep = 0; rep < config.seeds; ++rep) {
                RepOutcome outcome;

                SchemeSpec spec;
                spec.kind = scheme_kind_from_name(scheme_name);
                spec.params.gamma = config.gamma;
                spec.params.delta = config.delta;
                spec.params.seed = seed_stream(config.master_seed, "wm." + scheme_name, rep);
                spec.kgw_k = config.kgw_k;
                spec.embed_dim = config.embed_dim;
                spec.embed_window = config.embed_window;

                SchemeOracle oracle(spec, vocab.size());
                if (spec.kind == SchemeKind::sir_like) {
                    CalibrationOptions opts;
                    opts.suppressed_top_tokens = config.calibration_top_tokens;
                    opts.residual_gain = config.calibration_residual;
                    opts.anchor_gain = config.calibration_anchor;
                    oracle.calibrate_embeddings(base_tok, vocab.unk_id(), opts);
                }
                scheme_id = oracle.id();

                // Watermarked generations: evaluation docs from downstream
                // prompts, estimation corpus from base prompts.
                const auto eval_prompts =
                    make_prompts(downstream_tok, config.eval_docs, config.prompt_tokens, stage);
                const std::vector<TaggedSeq> eval_tagged =
                    generate_docs(generator, oracle, eval_prompts, config.completion_tokens,
                                  config.master_seed, "gen.eval." + scheme_name, rep, config.workers);
                const std::vector<TokenSeq> eval_docs = strip_tags(eval_tagged);

                std::vector<TaggedSeq> est_tagged;
                if (max_budget > 0) {
                    const std::size_t est_doc_count =
                        (max_budget + config.completion_tokens - 1) / config.completion_tokens;
                    const auto est_prompts =
                        make_prompts(base_tok, est_doc_count, config.prompt_tokens, stage);
                    est_tagged = generate_docs(generator, oracle, est_prompts,
                                               config.completion_tokens, config.master_seed,
                                               "gen.est." + scheme_name, rep, config.workers);
                }
                const std::vector<TokenSeq> est_docs = strip_tags(est_tagged);

                outcome.truth_mask = spec.kind == SchemeKind::unigram
                                         ? oracle.fixed_mask()
                                         : majority_green_mask(est_tagged, vocab.size());

                if (max_budget > 0) {
                    outcome.budget_curve =
                        f1_vs_budget(est_docs, base_freq, outcome.truth_mask, oracle, eval_docs,
                                     config.budgets, config.tau);
                    const TokenFrequencies wtm_freq =
                        token_frequencies_prefix(est_docs, vocab.size(), max_budget);
                    const EstimateResult est = estimate_green_list(wtm_freq, base_freq, config.tau);
                    outcome.estimated_mask = est.predicted;
                    outcome.est_delta = est.delta;
                    outcome.est_occurrences = wtm_freq.counts;
                } else {
                    outcome.estimated_mask = GreenMask(vocab.size());
                }

                // Null scores under this mask seed.
                std::vector<double> null_z(null_docs.size());
                parallel_for(null_docs.size(), config.workers, [&](std::size_t i) {
                    null_z[i] = detect(null_docs[i], oracle).z;
                });
                outcome.null_z_mean = 0.0;
                for (double z : null_z) outcome.null_z_mean += z;
                outcome.null_z_mean /= static_cast<double>(null_z.size());

                // Attack grid.
                std::vector<NamedAttack> attacks;
                attacks.push_back({"none", std::nullopt});
                for (double d : config.diversities) {
                    AttackConfig plain;
                    plain.diversity = d;
                    plain.bias_delta = 0.0;
                    plain.fidelity = config.attack_fidelity;
                    plain.novelty_penalty = config.attack_novelty;
                    plain.paraphraser = &paraphraser;
                    plain.stopwords = &stopwords;
                    char label[64];
                    std::snprintf(label, sizeof(label), "plain@%g", d);
                    plain.seed = seed_stream(config.master_seed, std::string("attack.") + label + "." + scheme_name, rep);
                    attacks.push_back({label, plain});

                    AttackConfig biased = plain;
                    biased.bias_delta = config.attack_bias;
                    biased.estimated_mask = &outcome.estimated_mask;
                    std::snprintf(label, sizeof(label), "biased@%g", d);
                    biased.seed = seed_stream(config.master_seed, std::string("attack.") + label + "." + scheme_name, rep);
                    attacks.push_back({label, biased});
                }

                std::vector<double> no_attack_z(eval_docs.size());
                std::vector<std::vector<TokenSeq>> attacked_docs(attacks.size());
                for (std::size_t a = 0; a < attacks.size(); ++a) {
                    const NamedAttack& attack = attacks[a];
                    std::vector<double> scores(eval_docs.size());
                    std::vector<double> overlaps(eval_docs.size());
                    std::vector<double> ppls(eval_docs.size());
                    std::vector<TokenSeq> outputs(eval_docs.size());
                    parallel_for(eval_docs.size(), config.workers, [&](std::size_t i) {
                        if (!attack.config) {
                            outputs[i] = eval_docs[i];
                            scores[i] = detect(eval_docs[i], oracle).z;
                            overlaps[i] = 1.0;
                            ppls[i] = oracle_lm.perplexity(eval_docs[i].ids);
                            return;
                        }
                        Rng rng(seed_stream(attack.config->seed, "attack.doc", i));
                        outputs[i] = paraphrase(eval_docs[i], *attack.config, rng);
                        scores[i] = detect(outputs[i], oracle).z;
                        overlaps[i] = overlap_score(eval_docs[i], outputs[i], stopwords);
                        ppls[i] = oracle_lm.perplexity(outputs[i].ids);
                    });
                    if (!attack.config) no_attack_z = scores;
                    attacked_docs[a] = std::move(outputs);

                    AttackEvalRow row;
                    row.scheme = oracle.id();
                    row.attack = attack.name;
                    row.tpr_1 = tpr_at_fpr(scores, null_z, 0.01);
                    row.tpr_10 = tpr_at_fpr(scores, null_z, 0.10);
                    row.overlap_median = median_of(overlaps);
                    row.ppl_median = median_of(ppls);
                    outcome.attack_rows.push_back(std::move(row));
                }

                // Entropy-weighted detector: no-attack docs and the
                // strongest biased attack (sequential; the cache is shared).
                {
                    std::vector<double> null_ewd(null_docs.size());
                    for (std::size_t i = 0; i < null_docs.size(); ++i) {
                        null_ewd[i] = ewd_score(null_docs[i], entropy, oracle, config.gamma);
                    }
                    std::vector<double> eval_ewd(eval_docs.size());
                    for (std::size_t i = 0; i < eval_docs.size(); ++i) {
                        eval_ewd[i] = ewd_score(eval_docs[i], entropy, oracle, config.gamma);
                    }
                    outcome.no_attack_z_tpr1 = tpr_at_fpr(no_attack_z, null_z, 0.01);
                    outcome.no_attack_ewd_tpr1 = tpr_at_fpr(eval_ewd, null_ewd, 0.01);
                    if (!config.diversities.empty()) {
                        const std::size_t last = attacks.size() - 1;  // strongest biased attack
                        std::vector<double> att_ewd(attacked_docs[last].size());
                        for (std::size_t i = 0; i < attacked_docs[last].size(); ++i) {
                            att_ewd[i] = ewd_score(attacked_docs[last][i], entropy, oracle, config.gamma);
                        }
                        outcome.biased_ewd_tpr1 = tpr_at_fpr(att_ewd, null_ewd, 0.01);
                    }
                }

                // Transfer: the same estimated mask attacking generations
                // prompted from a different downstream corpus.
                if (!downstream_b_tok.empty() && !config.diversities.empty()) {
                    const auto prompts_b =
                        make_prompts(downstream_b_tok, config.eval_docs, config.prompt_tokens, stage);
                    const std::vector<TaggedSeq> tagged_b =
                        generate_docs(generator, oracle, prompts_b, config.completion_tokens,
                                      config.master_seed, "gen.evalb." + scheme_name, rep,
                                      config.workers);
                    const std::vector<TokenSeq> eval_b = strip_tags(tagged_b);
                    const double d = config.diversities.back();
                    AttackConfig biased;
                    biased.diversity = d;
                    biased.bias_delta = config.attack_bias;
                    biased.fidelity = config.attack_fidelity;
                    biased.novelty_penalty = config.attack_novelty;
                    biased.estimated_mask = &outcome.estimated_mask;
                    biased.paraphraser = &paraphraser;
                    biased.stopwords = &stopwords;
                    biased.seed = seed_stream(config.master_seed, "attack.transfer." + scheme_name, rep);
                    std::vector<double> scores(eval_b.size());
                    std::vector<double> overlaps(eval_b.size());
                    std::vector<double> ppls(eval_b.size());
                    parallel_for(eval_b.size(), config.workers, [&](std::size_t i) {
                        Rng rng(seed_stream(biased.seed, "attack.doc", i));
                        const TokenSeq attacked = paraphrase(eval_b[i], biased, rng);
                        scores[i] = detect(attacked, oracle).z;
                        overlaps[i] = overlap_score(eval_b[i], attacked, stopwords);
                        ppls[i] = oracle_lm.perplexity(attacked.ids);
                    });
                    AttackEvalRow row;
                    row.scheme = oracle.id();
                    char label[64];
                    std::snprintf(label, sizeof(label), "biased@%g", d);
                    row.attack = label;
                    row.tpr_1 = tpr_at_fpr(scores, null_z, 0.01);
                    row.tpr_10 = tpr_at_fpr(scores, null_z, 0.10);
                    row.overlap_median = median_of(overlaps);
                    row.ppl_median = median_of(ppls);
                    outcome.transfer_rows.push_back(std::move(row));
                }

                // First-seed artifacts: per-document detection rows and the
                // estimation report.
                if (rep == 0 && config.keep_texts) {
                    auto f = open_out(out / ("gen_" + oracle.id() + ".txt"));
                    for (std::size_t i = 0; i < eval_docs.size(); ++i) {
                        if (i > 0) f << "\n";
                        f << detokenize(eval_docs[i].ids, vocab) << "\n";
                    }
                }
                if (rep == 0) {
                    std::vector<double> sorted_null = null_z;
                    const CalibratedThreshold t1 = calibrate_threshold(sorted_null, config.fprs.at(0));
                    const CalibratedThreshold t2 =
                        calibrate_threshold(sorted_null, config.fprs.size() > 1 ? config.fprs.at(1) : 0.10);
                    auto f = open_out(out / ("detect_" + oracle.id() + ".csv"));
                    f << "doc_id,label,T,g,z,ewd,verdict_1pct,verdict_10pct\n";
                    for (std::size_t i = 0; i < null_docs.size(); ++i) {
                        const DetectionResult r = detect(null_docs[i], oracle);
                        const double e = ewd_score(null_docs[i], entropy, oracle, config.gamma);
                        f << i << ",human," << r.total_tokens << "," << r.green_count << ","
                          << fmt_g9(r.z) << "," << fmt_g9(e) << "," << (r.z > t1.score_cutoff)
                          << "," << (r.z > t2.score_cutoff) << "\n";
                    }
                    for (std::size_t i = 0; i < eval_docs.size(); ++i) {
                        const DetectionResult r = detect(eval_docs[i], oracle);
                        const double e = ewd_score(eval_docs[i], entropy, oracle, config.gamma);
                        f << (null_docs.size() + i) << ",watermarked," << r.total_tokens << ","
                          << r.green_count << "," << fmt_g9(r.z) << "," << fmt_g9(e) << ","
                          << (r.z > t1.score_cutoff) << "," << (r.z > t2.score_cutoff) << "\n";
                    }
                }

                reps.push_back(std::move(outcome));
            }
        } catch (const std::exception& e) {
            stage_fail(stage, e.what());
        }

        // Median aggregation across seeds.
        SchemeReport scheme_report;
        scheme_report.name = scheme_id;
        scheme_report.truth_mask = reps[0].truth_mask;
        scheme_report.estimated_mask = reps[0].estimated_mask;
        {
            std::vector<double> v;
            for (const auto& r : reps) v.push_back(r.null_z_mean);
            scheme_report.null_z_mean = median_of(v);
            v.clear();
            for (const auto& r : reps) v.push_back(r.no_attack_z_tpr1);
            scheme_report.no_attack_z_tpr1 = median_of(v);
            v.clear();
            for (const auto& r : reps) v.push_back(r.no_attack_ewd_tpr1);
            scheme_report.no_attack_ewd_tpr1 = median_of(v);
            v.clear();
            for (const auto& r : reps) v.push_back(r.biased_ewd_tpr1);
            scheme_report.biased_ewd_tpr1 = median_of(v);
        }
        for (std::size_t b = 0; b < reps[0].budget_curve.size(); ++b) {
            BudgetPoint point;
            point.budget = reps[0].budget_curve[b].budget;
            std::vector<double> vv, gv;
            for (const auto& r : reps) {
                vv.push_back(r.budget_curve[b].vanilla);
                gv.push_back(r.budget_curve[b].generation_based);
            }
            point.vanilla = median_of(vv);
            point.generation_based = median_of(gv);
            scheme_report.budget_curve.push_back(point);
        }
        for (std::size_t a = 0; a < reps[0].attack_rows.size(); ++a) {
            AttackEvalRow row = reps[0].attack_rows[a];
            std::vector<double> t1, t10, ov, pp;
            for (const auto& r : reps) {
                t1.push_back(r.attack_rows[a].tpr_1);
                t10.push_back(r.attack_rows[a].tpr_10);
                ov.push_back(r.attack_rows[a].overlap_median);
                pp.push_back(r.attack_rows[a].ppl_median);
            }
            row.tpr_1 = median_of(t1);
            row.tpr_10 = median_of(t10);
            row.overlap_median = median_of(ov);
            row.ppl_median = median_of(pp);
            scheme_report.attack_rows.push_back(std::move(row));
        }
        for (std::size_t a = 0; a < reps[0].transfer_rows.size(); ++a) {
            AttackEvalRow row = reps[0].transfer_rows[a];
            std::vector<double> t1, t10, ov, pp;
            for (const auto& r : reps) {
                t1.push_back(r.transfer_rows[a].tpr_1);
                t10.push_back(r.transfer_rows[a].tpr_10);
                ov.push_back(r.transfer_rows[a].overlap_median);
                pp.push_back(r.transfer_rows[a].ppl_median);
            }
            row.tpr_1 = median_of(t1);
            row.tpr_10 = median_of(t10);
            row.overlap_median = median_of(ov);
            row.ppl_median = median_of(pp);
            scheme_report.transfer_rows.push_back(std::move(row));
        }

        // Scheme artifacts.
        scheme_report.truth_mask.save((out / ("mask_true_" + scheme_report.name + ".txt")).string());
        scheme_report.estimated_mask.save((out / ("mask_est_" + scheme_report.name + ".txt")).string());
        if (!reps[0].est_delta.empty()) {
            auto f = open_out(out / ("est_" + scheme_report.name + ".csv"));
            f << "token_id,delta,predicted,truth,occurrences\n";
            for (TokenId v = 0; v < vocab.size(); ++v) {
                f << v << "," << fmt_g9(reps[0].est_delta[v]) << ","
                  << reps[0].estimated_mask.is_green(v) << "," << reps[0].truth_mask.is_green(v)
                  << "," << reps[0].est_occurrences[v] << "\n";
            }
        }

        report.schemes.push_back(std::move(scheme_report));
    }

    // ---- analysis stage --------------------------------------------------
    try {
        const bool has_sir = std::find(config.schemes.begin(), config.schemes.end(), "sir") !=
                             config.schemes.end();
        if (has_sir && config.scatter_pairs > 0) {
            SchemeSpec spec;
            spec.kind = SchemeKind::sir_like;
            spec.params.gamma = config.gamma;
            spec.params.delta = config.delta;
            spec.params.seed = seed_stream(config.master_seed, "wm.sir", 0);
            spec.embed_dim = config.embed_dim;
            spec.embed_window = config.embed_window;
            SchemeOracle oracle(spec, vocab.size());
            CalibrationOptions opts;
            opts.suppressed_top_tokens = config.calibration_top_tokens;
            opts.residual_gain = config.calibration_residual;
            opts.anchor_gain = config.calibration_anchor;
            oracle.calibrate_embeddings(base_tok, vocab.unk_id(), opts);

            auto [in_a, in_b] = scatter_context_pairs(
                downstream_tok, config.scatter_pairs, config.embed_window,
                Rng(seed_stream(config.master_seed, "scatter.in", 0)));
            auto [ood_a, ood_b] = scatter_context_pairs(
                ood_tok, config.scatter_pairs, config.embed_window,
                Rng(seed_stream(config.master_seed, "scatter.ood", 0)));

            report.scatter = similarity_scatter(in_a, in_b, oracle, DomainTag::in_domain);
            const auto ood_pairs = similarity_scatter(ood_a, ood_b, oracle, DomainTag::out_of_domain);
            report.scatter.insert(report.scatter.end(), ood_pairs.begin(), ood_pairs.end());
            report.scatter_summary = summarize_scatter(report.scatter, vocab.size());

            auto f = open_out(out / "scatter.csv");
            f << "ctx_cos,logit_cos,domain\n";
            for (const auto& p : report.scatter) {
                f << fmt_g9(p.ctx_cosine) << "," << fmt_g9(p.logit_cosine) << ","
                  << (p.domain == DomainTag::in_domain ? "in_domain" : "out_of_domain") << "\n";
            }
        }
    } catch (const std::exception& e) {
        stage_fail("analysis", e.what());
    }

    // ---- report stage ------------------------------------------------
    try {
        {
            auto f = open_out(out / "table.csv");
            f << "scheme,attack,tpr_1,tpr_10,overlap_median,ppl_median\n";
            for (const auto& scheme : report.schemes) {
                for (const auto& row : scheme.attack_rows) {
                    f << row.scheme << "," << row.attack << "," << fmt_g9(row.tpr_1) << ","
                      << fmt_g9(row.tpr_10) << "," << fmt_g9(row.overlap_median) << ","
                      << fmt_g9(row.ppl_median) << "\n";
                }
            }
        }
        bool any_transfer = false;
        for (const auto& scheme : report.schemes) any_transfer |= !scheme.transfer_rows.empty();
        if (any_transfer) {
            auto f = open_out(out / "table_transfer.csv");
            f << "scheme,attack,tpr_1,tpr_10,overlap_median,ppl_median\n";
            for (const auto& scheme : report.schemes) {
                for (const auto& row : scheme.transfer_rows) {
                    f << row.scheme << "," << row.attack << "," << fmt_g9(row.tpr_1) << ","
                      << fmt_g9(row.tpr_10) << "," << fmt_g9(row.overlap_median) << ","
                      << fmt_g9(row.ppl_median) << "\n";
                }
            }
        }
        {
            auto f = open_out(out / "f1_budget.csv");
            f << "scheme,budget,vanilla_f1,generation_f1\n";
            for (const auto& scheme : report.schemes) {
                for (const auto& point : scheme.budget_curve) {
                    f << scheme.name << "," << point.budget << "," << fmt_g9(point.vanilla) << ","
                      << fmt_g9(point.generation_based) << "\n";
                }
            }
        }

        report.assertion_failures = [&] {
            std::vector<std::string> failures;
            auto find_scheme = [&](const std::string& name) -> const SchemeReport* {
                for (const auto& s : report.schemes) {
                    if (s.name == name) return &s;
                }
                return nullptr;
            };
            for (const AssertionSpec& a : config.assertions) {
                // Key grammar: metric[.scheme.target]; the target may itself
                // contain dots (attack names like biased@0.6).
                std::string metric = a.key, scheme_key, target;
                if (const auto first = a.key.find('.'); first != std::string::npos) {
                    metric = a.key.substr(0, first);
                    const std::string rest = a.key.substr(first + 1);
                    const auto second = rest.find('.');
                    if (second == std::string::npos) {
                        scheme_key = rest;
                    } else {
                        scheme_key = rest.substr(0, second);
                        target = rest.substr(second + 1);
                    }
                }
                double value = 0.0;
                bool found = false;
                if (metric == "tpr1_min" || metric == "tpr1_max" || metric == "tpr10_min" ||
                    metric == "tpr10_max" || metric == "overlap_min") {
                    if (const SchemeReport* s = find_scheme(scheme_key)) {
                        for (const auto& row : s->attack_rows) {
                            if (row.attack == target) {
                                if (metric.rfind("tpr1_", 0) == 0) value = row.tpr_1;
                                else if (metric.rfind("tpr10_", 0) == 0) value = row.tpr_10;
                                else value = row.overlap_median;
                                found = true;
                            }
                        }
                    }
                } else if (metric == "genf1_min" || metric == "gap_min") {
                    if (const SchemeReport* s = find_scheme(scheme_key)) {
                        for (const auto& point : s->budget_curve) {
                            if (std::to_string(point.budget) == target) {
                                value = metric == "genf1_min"
                                            ? point.generation_based
                                            : point.generation_based - point.vanilla;
                                found = true;
                            }
                        }
                    }
                } else if (metric == "spearman_in_min") {
                    value = report.scatter_summary.spearman_in_domain;
                    found = true;
                } else if (metric == "iqr_ratio_max") {
                    value = report.scatter_summary.iqr_ratio_max;
                    found = true;
                }
                if (!found) {
                    failures.push_back("assertion target not found: " + a.key);
                } else if (a.is_min ? value < a.bound : value > a.bound) {
                    failures.push_back(a.key + ": value " + fmt_g9(value) + " violates bound " +
                                       fmt_g9(a.bound));
                }
            }
            return failures;
        }();

        auto f = open_out(out / "summary.txt");
        char hash_buf[32];
        std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                      static_cast<unsigned long long>(report.config_hash));
        f << "config_hash " << hash_buf << "\n";
        f << "master_seed " << config.master_seed << "\n";
        for (const auto& scheme : report.schemes) {
            f << "scheme " << scheme.name << " null_z_mean " << fmt_g9(scheme.null_z_mean)
              << " z_tpr1 " << fmt_g9(scheme.no_attack_z_tpr1) << " ewd_tpr1 "
              << fmt_g9(scheme.no_attack_ewd_tpr1) << " ewd_tpr1_biased "
              << fmt_g9(scheme.biased_ewd_tpr1) << "\n";
        }
        // Tokens absent from the human reference but present in watermarked
        // output fall to the literal threshold rule; surface how many.
        for (const auto& scheme : report.schemes) {
            if (scheme.estimated_mask.size() == 0) continue;
            std::size_t zero_base = 0;
            for (TokenId v = 0; v < vocab.size(); ++v) {
                if (base_freq.counts[v] == 0 && scheme.estimated_mask.is_green(v)) ++zero_base;
            }
            f << "scheme " << scheme.name << " zero_base_green_predictions " << zero_base << "\n";
        }
        if (!report.scatter.empty()) {
            f << "scatter spearman_in " << fmt_g9(report.scatter_summary.spearman_in_domain)
              << " iqr_ratio_max " << fmt_g9(report.scatter_summary.iqr_ratio_max)
              << " matched_bands " << report.scatter_summary.matched_bands << "\n";
        }
        for (const auto& failure : report.assertion_failures) f << "FAILED " << failure << "\n";
        if (report.assertion_failures.empty() && !config.assertions.empty()) f << "assertions ok\n";
    } catch (const std::exception& e) {
        stage_fail("report", e.what());
    }

    return report;
}

}  // namespace wmlab
