#include <stdexcept>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "wmlab/harness.hpp"
#include "wmlab/rng.hpp"

using namespace wmlab;

namespace {

namespace fs = std::filesystem;

std::string tiny_config_text(std::uint64_t master_seed, double delta) {
    std::ostringstream out;
    out << R"([corpus]
train = synth:story:docs=260,tokens=300,seed=11
base = synth:story:docs=260,tokens=300,seed=12
downstream = synth:story:docs=200,tokens=300,seed=13
downstream_b = synth:story:docs=150,tokens=300,seed=15
ood = synth:technical:docs=120,tokens=300,seed=14
vocab_size = 2048

[watermark]
schemes = unigram,sir
delta = )" << delta
        << R"(

[detection]
null_docs = 150

[estimation]
budgets = 60000
tau = 1e-6

[attack]
diversities = 0.6

[analysis]
scatter_pairs = 250

[run]
eval_docs = 120
prompt_tokens = 30
completion_tokens = 150
seeds = 1
workers = 2
)";
    out << "master_seed = " << master_seed << "\n";
    return out.str();
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::uint64_t dir_fingerprint(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::uint64_t h = 0x1234;
    for (const auto& f : files) {
        h = mix64(h, hash_bytes(f.filename().string()));
        h = mix64(h, hash_bytes(slurp(f)));
    }
    return h;
}

}  // namespace

TEST_CASE("seed_stream stage independence") {
    // generation seeds do not move when the attack stage label changes
    const auto g0 = seed_stream(5, "gen.eval.unigram", 0);
    const auto g1 = seed_stream(5, "gen.eval.unigram", 0);
    CHECK(g0 == g1);
    CHECK(seed_stream(5, "attack.biased@0.6.unigram", 0) != g0);
}

TEST_CASE("pipeline runs, writes artifacts, and reruns byte-identically") {
    const auto root = fs::temp_directory_path() / "wmlab_pipe_test";
    fs::remove_all(root);
    const ExperimentConfig cfg = parse_config(tiny_config_text(7, 2.0));

    const ExperimentReport a = run_pipeline(cfg, (root / "run_a").string());
    REQUIRE(a.schemes.size() == 2);
    CHECK(a.config_hash == config_hash(cfg));

    for (const char* name : {"config.txt", "vocab.txt", "freq_base.csv", "table.csv",
                             "f1_budget.csv", "scatter.csv", "summary.txt",
                             "detect_unigram.csv", "est_unigram.csv", "mask_true_unigram.txt",
                             "mask_est_unigram.txt", "model_generator.bin"}) {
        REQUIRE_MESSAGE(fs::exists(root / "run_a" / name), name);
    }

    // watermarked text is detectable at this scale
    const SchemeReport& unigram = a.schemes[0];
    CHECK(unigram.name == "unigram");
    CHECK(unigram.attack_rows[0].attack == "none");
    CHECK(unigram.attack_rows[0].tpr_1 > 0.8);
    // and the biased attack knocks it down
    CHECK(unigram.attack_rows.back().attack == "biased@0.6");
    CHECK(unigram.attack_rows.back().tpr_1 < unigram.attack_rows[0].tpr_1);
    // the mask estimated on one corpus transfers to prompts from another;
    // at toy calibration scale assert the reduction, not the absolute rate
    REQUIRE(unigram.transfer_rows.size() == 1);
    CHECK(unigram.transfer_rows[0].tpr_1 <= unigram.attack_rows[0].tpr_1 - 0.4);
    CHECK(fs::exists(root / "run_a" / "table_transfer.csv"));

    const ExperimentReport b = run_pipeline(cfg, (root / "run_b").string());
    CHECK(dir_fingerprint(root / "run_a") == dir_fingerprint(root / "run_b"));
    CHECK(b.config_hash == a.config_hash);

    fs::remove_all(root);
}

TEST_CASE("delta zero pipelines detect nothing") {
    const auto root = fs::temp_directory_path() / "wmlab_pipe_null";
    fs::remove_all(root);
    ExperimentConfig cfg = parse_config(tiny_config_text(9, 0.0));
    cfg.budgets.clear();  // nothing to estimate without a signal
    cfg.scatter_pairs = 0;

    const ExperimentReport report = run_pipeline(cfg, (root / "out").string());
    for (const auto& scheme : report.schemes) {
        CHECK(scheme.attack_rows[0].tpr_1 <= 0.06);
    }
    fs::remove_all(root);
}

TEST_CASE("assertions gate the report") {
    const auto root = fs::temp_directory_path() / "wmlab_pipe_assert";
    fs::remove_all(root);
    ExperimentConfig cfg = parse_config(tiny_config_text(7, 2.0));
    cfg.schemes = {"unigram"};
    cfg.scatter_pairs = 0;
    cfg.assertions.push_back({"tpr1_min.unigram.none", true, 0.5});
    cfg.assertions.push_back({"overlap_min.unigram.biased@0.6", true, 0.0});  // dotted target
    cfg.assertions.push_back({"tpr1_max.unigram.none", false, 0.5});  // deliberately impossible

    const ExperimentReport report = run_pipeline(cfg, (root / "out").string());
    REQUIRE(report.assertion_failures.size() == 1);
    CHECK(report.assertion_failures[0].find("tpr1_max.unigram.none") != std::string::npos);
    fs::remove_all(root);
}
