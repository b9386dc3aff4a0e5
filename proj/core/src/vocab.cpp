#include "wmlab/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include "wmlab/rng.hpp"

namespace wmlab {

namespace {
constexpr const char* kUnkToken = "<unk>";

bool is_word_char(unsigned char c) {
    return std::isalnum(c) != 0 || c == '\'';
}
}  // namespace

Vocab::Vocab(std::vector<std::string> tokens_by_id) : token_of_(std::move(tokens_by_id)) {
    if (token_of_.empty() || token_of_[0] != kUnkToken) {
        throw std::invalid_argument("vocab: id 0 must be the unk token");
    }
    if (token_of_.size() > kMaxSize) {
        throw std::invalid_argument("vocab: exceeds maximum size");
    }
    id_of_.reserve(token_of_.size());
    for (TokenId i = 0; i < token_of_.size(); ++i) {
        if (!id_of_.emplace(token_of_[i], i).second) {
            throw std::invalid_argument("vocab: duplicate token string");
        }
    }
}

TokenId Vocab::id_of(std::string_view token) const noexcept {
    auto it = id_of_.find(std::string(token));
    return it == id_of_.end() ? unk_id() : it->second;
}

bool Vocab::contains(std::string_view token) const noexcept {
    return id_of_.find(std::string(token)) != id_of_.end();
}

std::uint64_t Vocab::content_hash() const noexcept {
    std::uint64_t h = 0x9AE16A3B2F90404Full;
    for (const auto& t : token_of_) {
        h = mix64(h, hash_bytes(t));
    }
    return h;
}

void Vocab::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("vocab: cannot open for write: " + path);
    for (const auto& t : token_of_) out << t << '\n';
    if (!out) throw std::runtime_error("vocab: write failed: " + path);
}

Vocab Vocab::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("vocab: cannot open: " + path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) tokens.push_back(line);
    }
    return Vocab(std::move(tokens));
}

std::vector<std::string> split_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string word;
    for (unsigned char c : text) {
        if (is_word_char(c)) {
            word.push_back(static_cast<char>(std::tolower(c)));
        } else {
            if (!word.empty()) {
                out.push_back(word);
                word.clear();
            }
            if (!std::isspace(c)) {
                out.emplace_back(1, static_cast<char>(c));
            }
        }
    }
    if (!word.empty()) out.push_back(word);
    return out;
}

Vocab build_vocab(const std::vector<std::string>& texts, std::uint32_t max_size) {
    if (max_size < 2) throw std::invalid_argument("build_vocab: max_size must be >= 2");
    if (max_size > Vocab::kMaxSize) throw std::invalid_argument("build_vocab: max_size too large");

    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& text : texts) {
        for (auto& tok : split_tokens(text)) {
            ++counts[std::move(tok)];
        }
    }
    if (counts.empty()) throw std::runtime_error("build_vocab: empty corpus");

    std::vector<std::pair<std::string, std::uint64_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > max_size - 1) ranked.resize(max_size - 1);

    std::vector<std::string> tokens;
    tokens.reserve(ranked.size() + 1);
    tokens.emplace_back(kUnkToken);
    for (auto& [tok, n] : ranked) tokens.push_back(std::move(tok));
    return Vocab(std::move(tokens));
}

std::vector<TokenId> tokenize(std::string_view text, const Vocab& vocab) {
    if (vocab.size() == 0) throw std::invalid_argument("tokenize: empty vocab");
    std::vector<TokenId> ids;
    for (const auto& tok : split_tokens(text)) {
        ids.push_back(vocab.id_of(tok));
    }
    return ids;
}

std::string detokenize(const std::vector<TokenId>& ids, const Vocab& vocab) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += vocab.token_of(ids[i]);
    }
    return out;
}

}  // namespace wmlab
