#include "wmlab/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wmlab/corpus.hpp"
#include "wmlab/rng.hpp"
#include "wmlab/watermark.hpp"

namespace wmlab {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(s);
    while (std::getline(in, part, sep)) {
        part = trim(part);
        if (!part.empty()) parts.push_back(part);
    }
    return parts;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double x = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return x;
    } catch (const std::exception&) {
        throw std::runtime_error("config: bad number for " + key + ": " + value);
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw std::runtime_error("config: bad integer for " + key + ": " + value);
    }
    return x;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::runtime_error("config: bad boolean for " + key + ": " + value);
}

}  // namespace

CorpusSource parse_corpus_source(const std::string& text) {
    CorpusSource source;
    source.spec_string = text;
    if (text.rfind("file:", 0) == 0) {
        source.kind = CorpusSource::Kind::file;
        source.path = text.substr(5);
        if (source.path.empty()) throw std::runtime_error("config: empty corpus path");
        return source;
    }
    if (text.rfind("synth:", 0) != 0) {
        throw std::runtime_error("config: corpus must be file:<path> or synth:<genre>:<params>: " + text);
    }
    const std::string rest = text.substr(6);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw std::runtime_error("config: synth corpus needs params: " + text);
    source.kind = CorpusSource::Kind::synthetic;
    source.genre = genre_from_name(rest.substr(0, colon));
    for (const std::string& kv : split_list(rest.substr(colon + 1), ',')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::runtime_error("config: bad synth param: " + kv);
        const std::string key = trim(kv.substr(0, eq));
        const std::string value = trim(kv.substr(eq + 1));
        if (key == "docs") source.docs = parse_u64(key, value);
        else if (key == "tokens") source.tokens = parse_u64(key, value);
        else if (key == "seed") source.seed = parse_u64(key, value);
        else throw std::runtime_error("config: unknown synth param: " + key);
    }
    if (source.docs == 0 || source.tokens == 0) {
        throw std::runtime_error("config: synth corpus needs docs and tokens: " + text);
    }
    return source;
}

std::vector<std::string> materialize_corpus(const CorpusSource& source) {
    if (source.kind == CorpusSource::Kind::file) {
        return read_documents(source.path);
    }
    return synth_corpus(source.genre, source.seed, source.docs, source.tokens);
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line;
    std::string section;
    bool saw_train = false, saw_base = false, saw_downstream = false, saw_ood = false;

    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw std::runtime_error("config: bad section header: " + line);
            section = line.substr(1, line.size() - 2);
            if (section != "corpus" && section != "lm" && section != "watermark" &&
                section != "detection" && section != "estimation" && section != "attack" &&
                section != "analysis" && section != "run" && section != "assertions") {
                throw std::runtime_error("config: unknown section: " + section);
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("config: expected key = value: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) throw std::runtime_error("config: empty key or value: " + line);

        if (section == "corpus") {
            if (key == "train") { config.train = parse_corpus_source(value); saw_train = true; }
            else if (key == "base") { config.base = parse_corpus_source(value); saw_base = true; }
            else if (key == "downstream") { config.downstream = parse_corpus_source(value); saw_downstream = true; }
            else if (key == "downstream_b") config.downstream_b = parse_corpus_source(value);
            else if (key == "ood") { config.ood = parse_corpus_source(value); saw_ood = true; }
            else if (key == "vocab_size") config.vocab_size = static_cast<std::uint32_t>(parse_u64(key, value));
            else throw std::runtime_error("config: unknown key in [corpus]: " + key);
        } else if (section == "lm") {
            if (key == "generator_order") config.generator_order = static_cast<int>(parse_u64(key, value));
            else if (key == "oracle_order") config.oracle_order = static_cast<int>(parse_u64(key, value));
            else if (key == "paraphraser_order") config.paraphraser_order = static_cast<int>(parse_u64(key, value));
            else if (key == "smoothing_k") config.smoothing_k = parse_double(key, value);
            else throw std::runtime_error("config: unknown key in [lm]: " + key);
        } else if (section == "watermark") {
            if (key == "schemes") config.schemes = split_list(value, ',');
            else if (key == "gamma") config.gamma = parse_double(key, value);
            else if (key == "delta") config.delta = parse_double(key, value);
            else if (key == "kgw_k") config.kgw_k = static_cast<std::uint32_t>(parse_u64(key, value));
            else if (key == "embed_dim") config.embed_dim = static_cast<std::uint32_t>(parse_u64(key, value));
            else if (key == "embed_window") config.embed_window = static_cast<std::uint32_t>(parse_u64(key, value));
            else if (key == "calibration_top_tokens") config.calibration_top_tokens = static_cast<std::uint32_t>(parse_u64(key, value));
            else if (key == "calibration_residual") config.calibration_residual = parse_double(key, value);
            else if (key == "calibration_anchor") config.calibration_anchor = parse_double(key, value);
            else throw std::runtime_error("config: unknown key in [watermark]: " + key);
        } else if (section == "detection") {
            if (key == "fprs") {
                config.fprs.clear();
                for (const auto& f : split_list(value, ',')) config.fprs.push_back(parse_double(key, f));
            } else if (key == "null_docs") config.null_docs = parse_u64(key, value);
            else throw std::runtime_error("config: unknown key in [detection]: " + key);
        } else if (section == "estimation") {
            if (key == "budgets") {
                config.budgets.clear();
                for (const auto& b : split_list(value, ',')) config.budgets.push_back(parse_u64(key, b));
            } else if (key == "tau") config.tau = parse_double(key, value);
            else throw std::runtime_error("config: unknown key in [estimation]: " + key);
        } else if (section == "attack") {
            if (key == "diversities") {
                config.diversities.clear();
                for (const auto& d : split_list(value, ',')) config.diversities.push_back(parse_double(key, d));
            } else if (key == "bias_delta") config.attack_bias = parse_double(key, value);
            else if (key == "fidelity") config.attack_fidelity = parse_double(key, value);
            else if (key == "novelty") config.attack_novelty = parse_double(key, value);
            else throw std::runtime_error("config: unknown key in [attack]: " + key);
        } else if (section == "analysis") {
            if (key == "scatter_pairs") config.scatter_pairs = parse_u64(key, value);
            else throw std::runtime_error("config: unknown key in [analysis]: " + key);
        } else if (section == "run") {
            if (key == "master_seed") config.master_seed = parse_u64(key, value);
            else if (key == "eval_docs") config.eval_docs = parse_u64(key, value);
            else if (key == "prompt_tokens") config.prompt_tokens = parse_u64(key, value);
            else if (key == "completion_tokens") config.completion_tokens = parse_u64(key, value);
            else if (key == "seeds") config.seeds = static_cast<unsigned>(parse_u64(key, value));
            else if (key == "workers") config.workers = static_cast<unsigned>(parse_u64(key, value));
            else if (key == "keep_texts") config.keep_texts = parse_bool(key, value);
            else throw std::runtime_error("config: unknown key in [run]: " + key);
        } else if (section == "assertions") {
            AssertionSpec spec;
            spec.key = key;
            const std::string head = key.substr(0, key.find('.'));
            if (head.size() > 4 && head.substr(head.size() - 4) == "_min") spec.is_min = true;
            else if (head.size() > 4 && head.substr(head.size() - 4) == "_max") spec.is_min = false;
            else throw std::runtime_error("config: assertion key must end in _min or _max: " + key);
            spec.bound = parse_double(key, value);
            config.assertions.push_back(spec);
        } else {
            throw std::runtime_error("config: key outside any section: " + key);
        }
    }

    if (!saw_train || !saw_base || !saw_downstream || !saw_ood) {
        throw std::runtime_error("config: [corpus] must set train, base, downstream and ood");
    }
    if (config.base == config.downstream) {
        throw std::runtime_error("config: estimation corpus must differ from downstream prompts");
    }
    if (config.vocab_size < 2) throw std::runtime_error("config: vocab_size too small");
    if (config.seeds < 1) throw std::runtime_error("config: seeds must be >= 1");
    if (config.prompt_tokens < 1 || config.completion_tokens < 1) {
        throw std::runtime_error("config: prompt/completion lengths must be >= 1");
    }
    for (const auto& name : config.schemes) scheme_kind_from_name(name);
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("config: cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_echo(const ExperimentConfig& config) {
    std::ostringstream out;
    out.precision(17);
    out << "[corpus]\n";
    out << "train = " << config.train.spec_string << "\n";
    out << "base = " << config.base.spec_string << "\n";
    out << "downstream = " << config.downstream.spec_string << "\n";
    if (config.downstream_b) out << "downstream_b = " << config.downstream_b->spec_string << "\n";
    out << "ood = " << config.ood.spec_string << "\n";
    out << "vocab_size = " << config.vocab_size << "\n";
    out << "[lm]\n";
    out << "generator_order = " << config.generator_order << "\n";
    out << "oracle_order = " << config.oracle_order << "\n";
    out << "paraphraser_order = " << config.paraphraser_order << "\n";
    out << "smoothing_k = " << config.smoothing_k << "\n";
    out << "[watermark]\n";
    out << "schemes = ";
    for (std::size_t i = 0; i < config.schemes.size(); ++i) {
        if (i) out << ",";
        out << config.schemes[i];
    }
    out << "\n";
    out << "gamma = " << config.gamma << "\n";
    out << "delta = " << config.delta << "\n";
    out << "kgw_k = " << config.kgw_k << "\n";
    out << "embed_dim = " << config.embed_dim << "\n";
    out << "embed_window = " << config.embed_window << "\n";
    out << "calibration_top_tokens = " << config.calibration_top_tokens << "\n";
    out << "calibration_residual = " << config.calibration_residual << "\n";
    out << "calibration_anchor = " << config.calibration_anchor << "\n";
    out << "[detection]\n";
    out << "fprs = ";
    for (std::size_t i = 0; i < config.fprs.size(); ++i) {
        if (i) out << ",";
        out << config.fprs[i];
    }
    out << "\n";
    out << "null_docs = " << config.null_docs << "\n";
    out << "[estimation]\n";
    out << "budgets = ";
    for (std::size_t i = 0; i < config.budgets.size(); ++i) {
        if (i) out << ",";
        out << config.budgets[i];
    }
    out << "\n";
    out << "tau = " << config.tau << "\n";
    out << "[attack]\n";
    out << "diversities = ";
    for (std::size_t i = 0; i < config.diversities.size(); ++i) {
        if (i) out << ",";
        out << config.diversities[i];
    }
    out << "\n";
    out << "bias_delta = " << config.attack_bias << "\n";
    out << "fidelity = " << config.attack_fidelity << "\n";
    out << "novelty = " << config.attack_novelty << "\n";
    out << "[analysis]\n";
    out << "scatter_pairs = " << config.scatter_pairs << "\n";
    out << "[run]\n";
    out << "master_seed = " << config.master_seed << "\n";
    out << "eval_docs = " << config.eval_docs << "\n";
    out << "prompt_tokens = " << config.prompt_tokens << "\n";
    out << "completion_tokens = " << config.completion_tokens << "\n";
    out << "seeds = " << config.seeds << "\n";
    out << "keep_texts = " << (config.keep_texts ? "true" : "false") << "\n";
    if (!config.assertions.empty()) {
        out << "[assertions]\n";
        for (const auto& a : config.assertions) out << a.key << " = " << a.bound << "\n";
    }
    return out.str();
}

std::uint64_t config_hash(const ExperimentConfig& config) {
    return hash_bytes(config_echo(config));
}

}  // namespace wmlab
