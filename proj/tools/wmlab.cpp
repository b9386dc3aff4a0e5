// wmlab: green-list watermark laboratory.
//
// Subcommand groups mirror the pipeline: corpus preparation, language
// model training, watermarked generation and detection, green-list
// estimation, paraphrase attacks, the semantic-similarity analysis, and
// the end-to-end experiment runner.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "wmlab/analysis.hpp"
#include "wmlab/attack.hpp"
#include "wmlab/csv.hpp"
#include "wmlab/detector.hpp"
#include "wmlab/estimator.hpp"
#include "wmlab/harness.hpp"
#include "wmlab/parallel.hpp"
#include "wmlab/textgen.hpp"

namespace {

using namespace wmlab;

struct SchemeCliOptions {
    std::string scheme = "unigram";
    double gamma = 0.5;
    double delta = 2.0;
    std::uint64_t seed = 1;
    std::uint32_t kgw_k = 1;
    std::uint32_t embed_dim = 160;
    std::uint32_t embed_window = 4;
    std::string calibrate_path;  // corpus used to pin the semantic map
};

void add_scheme_options(CLI::App* cmd, SchemeCliOptions& opts) {
    cmd->add_option("--scheme", opts.scheme, "unigram|kgw|sir|atw")->capture_default_str();
    cmd->add_option("--gamma", opts.gamma, "green fraction")->capture_default_str();
    cmd->add_option("--delta", opts.delta, "logit boost")->capture_default_str();
    cmd->add_option("--seed", opts.seed, "watermark key seed")->capture_default_str();
    cmd->add_option("--k", opts.kgw_k, "context width of the hashed scheme")->capture_default_str();
    cmd->add_option("--dim", opts.embed_dim, "embedding dimension")->capture_default_str();
    cmd->add_option("--window", opts.embed_window, "embedding context window")->capture_default_str();
    cmd->add_option("--calibrate", opts.calibrate_path,
                    "reference corpus for the semantic scheme's map");
}

SchemeOracle make_oracle(const SchemeCliOptions& opts, const Vocab& vocab) {
    SchemeSpec spec;
    spec.kind = scheme_kind_from_name(opts.scheme);
    spec.params = {opts.gamma, opts.delta, opts.seed};
    spec.kgw_k = opts.kgw_k;
    spec.embed_dim = opts.embed_dim;
    spec.embed_window = opts.embed_window;
    SchemeOracle oracle(spec, vocab.size());
    if (spec.kind == SchemeKind::sir_like && !opts.calibrate_path.empty()) {
        const auto docs = tokenize_documents(read_documents(opts.calibrate_path), vocab);
        oracle.calibrate_embeddings(docs, vocab.unk_id());
    }
    return oracle;
}

std::vector<TokenSeq> load_token_docs(const std::string& path, const Vocab& vocab) {
    return tokenize_documents(read_documents(path), vocab);
}

int run_cli(int argc, char** argv) {
    CLI::App app{"green-list watermark laboratory"};
    app.require_subcommand(1);

    // ---- corpus ----------------------------------------------------------
    auto* corpus = app.add_subcommand("corpus", "vocabulary and frequency tools");
    corpus->require_subcommand(1);

    std::string in_path, out_path, vocab_path;
    std::uint32_t max_size = 8192;
    auto* build = corpus->add_subcommand("build-vocab", "build a vocabulary from raw text");
    build->add_option("--input", in_path, "corpus file")->required();
    build->add_option("--max-size", max_size, "vocabulary cap")->capture_default_str();
    build->add_option("--out", out_path, "vocabulary file")->required();
    build->callback([&] {
        const Vocab vocab = build_vocab(read_documents(in_path), max_size);
        vocab.save(out_path);
        std::cout << "vocab size " << vocab.size() << " -> " << out_path << "\n";
    });

    auto* freq = corpus->add_subcommand("freq", "relative token frequencies");
    freq->add_option("--input", in_path, "corpus file")->required();
    freq->add_option("--vocab", vocab_path, "vocabulary file")->required();
    freq->add_option("--out", out_path, "csv output")->required();
    freq->callback([&] {
        const Vocab vocab = Vocab::load(vocab_path);
        const auto f = token_frequencies(load_token_docs(in_path, vocab), vocab.size());
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + out_path);
        out << "token_id,token,rel_freq,count\n";
        for (TokenId v = 0; v < vocab.size(); ++v) {
            out << v << "," << csv_field(vocab.token_of(v)) << "," << fmt_g9(f.rel_freq[v]) << ","
                << f.counts[v] << "\n";
        }
        std::cout << f.total_tokens << " tokens -> " << out_path << "\n";
    });

    auto* synth = corpus->add_subcommand("synth", "emit a synthetic corpus");
    std::string genre = "story";
    std::size_t docs = 100, tokens = 300;
    std::uint64_t synth_seed = 1;
    synth->add_option("--genre", genre, "story|technical")->capture_default_str();
    synth->add_option("--docs", docs)->capture_default_str();
    synth->add_option("--tokens", tokens, "tokens per document")->capture_default_str();
    synth->add_option("--seed", synth_seed)->capture_default_str();
    synth->add_option("--out", out_path)->required();
    synth->callback([&] {
        write_documents(out_path, synth_corpus(genre_from_name(genre), synth_seed, docs, tokens));
        std::cout << docs << " documents -> " << out_path << "\n";
    });

    // ---- lm --------------------------------------------------------------
    auto* lm = app.add_subcommand("lm", "n-gram language models");
    lm->require_subcommand(1);

    int order = 3;
    double smoothing_k = 0.0001;
    std::string model_path;
    auto* train = lm->add_subcommand("train", "train and save a model");
    train->add_option("--input", in_path)->required();
    train->add_option("--vocab", vocab_path)->required();
    train->add_option("--order", order)->capture_default_str();
    train->add_option("--k", smoothing_k, "add-k smoothing constant")->capture_default_str();
    train->add_option("--out", model_path)->required();
    train->callback([&] {
        const Vocab vocab = Vocab::load(vocab_path);
        const auto model = NGramModel::train(load_token_docs(in_path, vocab), order, smoothing_k,
                                             vocab.size(), vocab.content_hash());
        model.save(model_path);
        std::cout << "order-" << order << " model -> " << model_path << "\n";
    });

    auto* ppl = lm->add_subcommand("ppl", "perplexity of each document");
    ppl->add_option("--input", in_path)->required();
    ppl->add_option("--vocab", vocab_path)->required();
    ppl->add_option("--model", model_path)->required();
    ppl->callback([&] {
        const Vocab vocab = Vocab::load(vocab_path);
        const auto model = NGramModel::load(model_path, vocab);
        for (const auto& doc : load_token_docs(in_path, vocab)) {
            std::cout << fmt_g9(model.perplexity(doc.ids)) << "\n";
        }
    });

    // ---- wm --------------------------------------------------------------
    auto* wm = app.add_subcommand("wm", "watermark generation, detection, estimation, attack");
    wm->require_subcommand(1);

    SchemeCliOptions scheme_opts;
    std::string prompts_path, null_path, mask_path, base_path, report_path;
    std::size_t gen_len = 200;
    std::size_t prompt_tokens = 50;
    double fpr = 0.01;
    double tau = kDefaultEstimationTau;
    double diversity = 0.6, bias = 7.0, fidelity = 12.0, novelty = 2.0;
    unsigned workers = 0;

    auto* generate = wm->add_subcommand("generate", "watermarked completions of prompts");
    add_scheme_options(generate, scheme_opts);
    generate->add_option("--model", model_path)->required();
    generate->add_option("--vocab", vocab_path)->required();
    generate->add_option("--prompts", prompts_path, "prompt corpus")->required();
    generate->add_option("--prompt-tokens", prompt_tokens)->capture_default_str();
    generate->add_option("--len", gen_len, "completion length")->capture_default_str();
    generate->add_option("--out", out_path)->required();
    generate->add_option("--workers", workers)->capture_default_str();
    generate->callback([&] {
        const Vocab vocab = Vocab::load(vocab_path);
        const auto model = NGramModel::load(model_path, vocab);
        const SchemeOracle oracle = make_oracle(scheme_opts, vocab);
        const auto prompt_docs = load_token_docs(prompts_path, vocab);
        std::vector<std::string> out_docs(prompt_docs.size());
        parallel_for(prompt_docs.size(), workers, [&](std::size_t i) {
            const auto& ids = prompt_docs[i].ids;
            if (ids.size() < prompt_tokens) throw std::runtime_error("prompt document too short");
            Rng rng(seed_stream(scheme_opts.seed, "cli.generate", i));
            const TaggedSeq doc = generate_watermarked(
                model, oracle, {ids.data(), prompt_tokens}, gen_len, rng);
            out_docs[i] = detokenize(doc.tokens.ids, vocab);
        });
        write_documents(out_path, out_docs);
        std::cout << out_docs.size() << " completions -> " << out_path << "\n";
    });

    auto* export_mask = wm->add_subcommand("export-mask", "ground-truth green list");
    add_scheme_options(export_mask, scheme_opts);
    export_mask->add_option("--vocab", vocab_path)->required();
    export_mask->add_option("--out", out_path)->required();
    export_mask->callback([&] {
        const Vocab vocab = Vocab::load(vocab_path);
        const SchemeOracle oracle = make_oracle(scheme_opts, vocab);
        const GreenMask mask = oracle.spec().kind == SchemeKind::unigram
                                   ? oracle.fixed_mask()
                                   : oracle.mask_at({});  // resting green set
        mask.save(out_path);
        std::cout << mask.green_count() << " green ids -> " << out_path << "\n";
    });

    auto* detect_cmd = wm->add_subcommand("detect", "score documents against a null sample");
    add_scheme_options(detect_cmd, scheme_opts);
    detect_cmd->add_option("--vocab", vocab_path)->required();
    detect_cmd->add_option("--input", in_path, "documents to score")->required();
    detect_cmd->add_option("--null", null_path, "human documents")->required();
    detect_cmd->add_option("--fpr", fpr)->capture_default_str();
    detect_cmd->add_option("--scoring-model", model_path, "entropy-weighted detector model");
    detect_cmd->add_option("--out", out_path)->required();
    detect_cmd->callback([&] {
        const Vocab vocab = Vocab::load(vocab_path);
        const SchemeOracle oracle = make_oracle(scheme_opts, vocab);
        const auto docs = load_token_docs(in_path, vocab);
        const auto nulls = load_token_docs(null_path, vocab);

        std::optional<NGramModel> scoring;
        if (!model_path.empty()) scoring = NGramModel::load(model_path, vocab);

        std::vector<double> null_z(nulls.size());
        for (std::size_t i = 0; i < nulls.size(); ++i) null_z[i] = detect(nulls[i], oracle).z;
        const auto t_main = calibrate_threshold(null_z, fpr);
        const auto t_10 = calibrate_threshold(null_z, 0.10);

        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + out_path);
        out << "doc_id,label,T,g,z,ewd,verdict_1pct,verdict_10pct\n";
        std::optional<EntropyCache> entropy;
        if (scoring) entropy.emplace(*scoring);
        auto emit = [&](std::size_t id, const char* label, const TokenSeq& doc) {
            const DetectionResult r = detect(doc, oracle);
            const double e =
                entropy ? ewd_score(doc, *entropy, oracle, scheme_opts.gamma) : 0.0;
            out << id << "," << label << "," << r.total_tokens << "," << r.green_count << ","
                << fmt_g9(r.z) << "," << fmt_g9(e) << "," << (r.z > t_main.score_cutoff) << ","
                << (r.z > t_10.score_cutoff) << "\n";
        };
        for (std::size_t i = 0; i < nulls.size(); ++i) emit(i, "human", nulls[i]);
        for (std::size_t i = 0; i < docs.size(); ++i) emit(nulls.size() + i, "input", docs[i]);
        std::cout << docs.size() << " scored docs -> " << out_path << "\n";
    });

    auto* estimate = wm->add_subcommand("estimate", "reverse-engineer the green list");
    estimate->add_option("--wtm", in_path, "watermarked corpus")->required();
    estimate->add_option("--base", base_path, "human base corpus")->required();
    estimate->add_option("--vocab", vocab_path)->required();
    estimate->add_option("--tau", tau)->capture_default_str();
    estimate->add_option("--out", out_path, "predicted green ids")->required();
    estimate->add_option("--report", report_path, "per-token csv");
    estimate->add_option("--truth-mask", mask_path, "ground truth ids for the report");
    estimate->callback([&] {
        const Vocab vocab = Vocab::load(vocab_path);
        const auto wtm_docs = load_token_docs(in_path, vocab);
        const auto wtm = token_frequencies(wtm_docs, vocab.size());
        const auto human = token_frequencies(load_token_docs(base_path, vocab), vocab.size());
        const EstimateResult est = estimate_green_list(wtm, human, tau);
        est.predicted.save(out_path);
        if (!report_path.empty()) {
            std::optional<GreenMask> truth;
            if (!mask_path.empty()) truth = GreenMask::load(mask_path, vocab.size());
            std::ofstream out(report_path, std::ios::binary);
            if (!out) throw std::runtime_error("cannot open " + report_path);
            out << "token_id,delta,predicted,truth,occurrences\n";
            for (TokenId v = 0; v < vocab.size(); ++v) {
                out << v << "," << fmt_g9(est.delta[v]) << "," << est.predicted.is_green(v) << ","
                    << (truth ? (truth->is_green(v) ? "1" : "0") : "") << "," << wtm.counts[v]
                    << "\n";
            }
        }
        std::cout << est.predicted.green_count() << " predicted green ids -> " << out_path << "\n";
    });

    auto* attack_cmd = wm->add_subcommand("attack", "paraphrase documents");
    attack_cmd->add_option("--vocab", vocab_path)->required();
    attack_cmd->add_option("--paraphraser", model_path, "paraphraser model")->required();
    attack_cmd->add_option("--base", base_path, "stopword source corpus")->required();
    attack_cmd->add_option("--input", in_path, "documents to attack")->required();
    attack_cmd->add_option("--mask", mask_path, "estimated green ids");
    attack_cmd->add_option("--diversity", diversity)->capture_default_str();
    attack_cmd->add_option("--bias", bias)->capture_default_str();
    attack_cmd->add_option("--fidelity", fidelity)->capture_default_str();
    attack_cmd->add_option("--novelty", novelty)->capture_default_str();
    attack_cmd->add_option("--seed", scheme_opts.seed)->capture_default_str();
    attack_cmd->add_option("--out", out_path)->required();
    attack_cmd->callback([&] {
        const Vocab vocab = Vocab::load(vocab_path);
        const auto model = NGramModel::load(model_path, vocab);
        const auto docs = load_token_docs(in_path, vocab);
        const auto base_freq = token_frequencies(load_token_docs(base_path, vocab), vocab.size());
        const auto stopwords = stopword_flags(base_freq, 50);
        std::optional<GreenMask> mask;
        if (!mask_path.empty()) mask = GreenMask::load(mask_path, vocab.size());

        AttackConfig cfg;
        cfg.diversity = diversity;
        cfg.bias_delta = bias;
        cfg.fidelity = fidelity;
        cfg.novelty_penalty = novelty;
        cfg.paraphraser = &model;
        cfg.stopwords = &stopwords;
        cfg.estimated_mask = mask ? &*mask : nullptr;
        cfg.seed = scheme_opts.seed;

        std::vector<std::string> out_docs(docs.size());
        for (std::size_t i = 0; i < docs.size(); ++i) {
            Rng rng(seed_stream(cfg.seed, "attack.doc", i));
            out_docs[i] = detokenize(paraphrase(docs[i], cfg, rng).ids, vocab);
        }
        write_documents(out_path, out_docs);
        std::cout << docs.size() << " paraphrases -> " << out_path << "\n";
    });

    auto* eval = wm->add_subcommand("eval", "attack table for one scheme");
    add_scheme_options(eval, scheme_opts);
    eval->add_option("--vocab", vocab_path)->required();
    eval->add_option("--input", in_path, "watermarked docs")->required();
    eval->add_option("--null", null_path, "human docs")->required();
    eval->add_option("--paraphraser", model_path)->required();
    std::string oracle_model_path;
    eval->add_option("--oracle-model", oracle_model_path, "perplexity oracle")->required();
    eval->add_option("--base", base_path, "stopword source corpus")->required();
    eval->add_option("--mask", mask_path, "estimated green ids");
    eval->add_option("--diversity", diversity)->capture_default_str();
    eval->add_option("--bias", bias)->capture_default_str();
    eval->add_option("--fidelity", fidelity)->capture_default_str();
    eval->add_option("--novelty", novelty)->capture_default_str();
    eval->add_option("--workers", workers)->capture_default_str();
    eval->add_option("--out", out_path)->required();
    eval->callback([&] {
        const Vocab vocab = Vocab::load(vocab_path);
        const SchemeOracle oracle = make_oracle(scheme_opts, vocab);
        const auto docs = load_token_docs(in_path, vocab);
        const auto nulls = load_token_docs(null_path, vocab);
        const auto paraphraser = NGramModel::load(model_path, vocab);
        const auto oracle_lm = NGramModel::load(oracle_model_path, vocab);
        const auto base_freq = token_frequencies(load_token_docs(base_path, vocab), vocab.size());
        const auto stopwords = stopword_flags(base_freq, 50);
        std::optional<GreenMask> mask;
        if (!mask_path.empty()) mask = GreenMask::load(mask_path, vocab.size());

        AttackConfig plain;
        plain.diversity = diversity;
        plain.bias_delta = 0.0;
        plain.fidelity = fidelity;
        plain.novelty_penalty = novelty;
        plain.paraphraser = &paraphraser;
        plain.stopwords = &stopwords;
        plain.seed = seed_stream(scheme_opts.seed, "cli.eval.plain", 0);

        std::vector<NamedAttack> attacks{{"none", std::nullopt}, {"plain", plain}};
        if (mask) {
            AttackConfig biased = plain;
            biased.bias_delta = bias;
            biased.estimated_mask = &*mask;
            biased.seed = seed_stream(scheme_opts.seed, "cli.eval.biased", 0);
            attacks.push_back({"biased", biased});
        }

        const SchemeEvalInput input{&oracle, &docs};
        const auto rows = run_attack_eval({&input, 1}, attacks, nulls, oracle_lm, workers);
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + out_path);
        out << "scheme,attack,tpr_1,tpr_10,overlap_median,ppl_median\n";
        for (const auto& row : rows) {
            out << row.scheme << "," << row.attack << "," << fmt_g9(row.tpr_1) << ","
                << fmt_g9(row.tpr_10) << "," << fmt_g9(row.overlap_median) << ","
                << fmt_g9(row.ppl_median) << "\n";
        }
        std::cout << rows.size() << " rows -> " << out_path << "\n";
    });

    auto* analyze = wm->add_subcommand("analyze-sir", "context/logit similarity scatter");
    add_scheme_options(analyze, scheme_opts);
    std::string in_domain_path, ood_path;
    std::size_t pairs = 1000;
    analyze->add_option("--vocab", vocab_path)->required();
    analyze->add_option("--pairs", pairs)->capture_default_str();
    analyze->add_option("--in-domain", in_domain_path)->required();
    analyze->add_option("--ood", ood_path)->required();
    analyze->add_option("--out", out_path)->required();
    analyze->callback([&] {
        const Vocab vocab = Vocab::load(vocab_path);
        scheme_opts.scheme = "sir";
        const SchemeOracle oracle = make_oracle(scheme_opts, vocab);
        const auto in_docs = load_token_docs(in_domain_path, vocab);
        const auto ood_docs = load_token_docs(ood_path, vocab);

        auto sample = [&](const std::vector<TokenSeq>& docs, std::uint64_t salt) {
            std::vector<TokenSeq> a, b;
            Rng rng(seed_stream(scheme_opts.seed, "cli.scatter", salt));
            const std::uint32_t window = scheme_opts.embed_window;
            for (std::size_t i = 0; i < pairs; ++i) {
                const auto& d1 = docs[rng.next_below(static_cast<std::uint32_t>(docs.size()))].ids;
                const auto& d2 = docs[rng.next_below(static_cast<std::uint32_t>(docs.size()))].ids;
                if (d1.size() < window || d2.size() < window) continue;
                const std::size_t p1 = rng.next_below(static_cast<std::uint32_t>(d1.size() - window + 1));
                const std::size_t p2 = rng.next_below(static_cast<std::uint32_t>(d2.size() - window + 1));
                TokenSeq ca, cb;
                ca.ids.assign(d1.begin() + p1, d1.begin() + p1 + window);
                if (rng.next_double() < 0.5) {
                    cb = ca;
                    for (auto& id : cb.ids) {
                        if (rng.next_double() < 0.5) id = d2[p2];
                    }
                } else {
                    cb.ids.assign(d2.begin() + p2, d2.begin() + p2 + window);
                }
                a.push_back(std::move(ca));
                b.push_back(std::move(cb));
            }
            return std::pair(a, b);
        };

        auto [in_a, in_b] = sample(in_docs, 1);
        auto [ood_a, ood_b] = sample(ood_docs, 2);
        auto scatter = similarity_scatter(in_a, in_b, oracle, DomainTag::in_domain);
        const auto ood_pairs = similarity_scatter(ood_a, ood_b, oracle, DomainTag::out_of_domain);
        scatter.insert(scatter.end(), ood_pairs.begin(), ood_pairs.end());

        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + out_path);
        out << "ctx_cos,logit_cos,domain\n";
        for (const auto& p : scatter) {
            out << fmt_g9(p.ctx_cosine) << "," << fmt_g9(p.logit_cosine) << ","
                << (p.domain == DomainTag::in_domain ? "in_domain" : "out_of_domain") << "\n";
        }
        std::cout << scatter.size() << " pairs -> " << out_path << "\n";
    });

    // ---- run ---------------------------------------------------------------
    auto* run = app.add_subcommand("run", "end-to-end experiment from a config");
    std::string config_path, run_out;
    run->add_option("--config", config_path)->required();
    run->add_option("--out", run_out)->required();
    run->callback([&] {
        const ExperimentConfig cfg = load_config(config_path);
        const ExperimentReport report = run_pipeline(cfg, run_out);
        for (const auto& scheme : report.schemes) {
            for (const auto& row : scheme.attack_rows) {
                std::cout << row.scheme << " " << row.attack << " tpr@1% " << fmt_g9(row.tpr_1)
                          << " tpr@10% " << fmt_g9(row.tpr_10) << " overlap "
                          << fmt_g9(row.overlap_median) << "\n";
            }
        }
        if (!report.assertion_failures.empty()) {
            for (const auto& failure : report.assertion_failures) {
                std::cerr << "assertion failed: " << failure << "\n";
            }
            throw std::runtime_error("config assertions failed");
        }
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "wmlab: " << e.what() << "\n";
        return 1;
    }
}
