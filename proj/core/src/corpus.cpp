#include "wmlab/corpus.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wmlab {

std::vector<std::string> split_documents(const std::string& text) {
    std::vector<std::string> docs;
    std::string current;
    std::istringstream in(text);
    std::string line;
    auto flush = [&] {
        if (current.find_first_not_of(" \t\r\n") != std::string::npos) {
            docs.push_back(current);
        }
        current.clear();
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) {
            flush();
        } else {
            if (!current.empty()) current.push_back('\n');
            current += line;
        }
    }
    flush();
    return docs;
}

std::vector<std::string> read_documents(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("corpus: cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return split_documents(buf.str());
}

void write_documents(const std::string& path, const std::vector<std::string>& docs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("corpus: cannot open for write: " + path);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (i > 0) out << "\n";
        out << docs[i] << "\n";
    }
    if (!out) throw std::runtime_error("corpus: write failed: " + path);
}

std::vector<TokenSeq> tokenize_documents(const std::vector<std::string>& docs, const Vocab& vocab,
                                         SourceLabel label) {
    std::vector<TokenSeq> out;
    out.reserve(docs.size());
    for (const auto& doc : docs) {
        TokenSeq seq;
        seq.ids = tokenize(doc, vocab);
        seq.source_label = label;
        out.push_back(std::move(seq));
    }
    return out;
}

TokenFrequencies token_frequencies(const std::vector<TokenSeq>& docs, std::uint32_t vocab_size) {
    TokenFrequencies f;
    f.counts.assign(vocab_size, 0);
    for (const auto& doc : docs) {
        for (TokenId id : doc.ids) {
            if (id >= vocab_size) throw std::out_of_range("token_frequencies: id out of range");
            ++f.counts[id];
            ++f.total_tokens;
        }
    }
    if (f.total_tokens == 0) throw std::runtime_error("token_frequencies: no tokens");
    f.rel_freq.resize(vocab_size);
    const double inv = 1.0 / static_cast<double>(f.total_tokens);
    for (std::uint32_t v = 0; v < vocab_size; ++v) {
        f.rel_freq[v] = static_cast<double>(f.counts[v]) * inv;
    }
    return f;
}

TokenFrequencies token_frequencies_prefix(const std::vector<TokenSeq>& docs,
                                          std::uint32_t vocab_size, std::uint64_t budget) {
    TokenFrequencies f;
    f.counts.assign(vocab_size, 0);
    std::uint64_t remaining = budget;
    for (const auto& doc : docs) {
        if (remaining == 0) break;
        for (TokenId id : doc.ids) {
            if (remaining == 0) break;
            if (id >= vocab_size) throw std::out_of_range("token_frequencies: id out of range");
            ++f.counts[id];
            ++f.total_tokens;
            --remaining;
        }
    }
    if (remaining > 0) throw std::runtime_error("token_frequencies: budget exceeds available tokens");
    if (f.total_tokens == 0) throw std::runtime_error("token_frequencies: no tokens");
    f.rel_freq.resize(vocab_size);
    const double inv = 1.0 / static_cast<double>(f.total_tokens);
    for (std::uint32_t v = 0; v < vocab_size; ++v) {
        f.rel_freq[v] = static_cast<double>(f.counts[v]) * inv;
    }
    return f;
}

}  // namespace wmlab
