#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wmlab {

using TokenId = std::uint32_t;

// Word-level vocabulary over dense ids.  Id 0 is always the unknown token;
// the rest are the most frequent token strings of the source corpus, most
// frequent first, ties broken lexicographically.
class Vocab {
public:
    static constexpr std::uint32_t kMaxSize = 1u << 16;

    Vocab() = default;
    explicit Vocab(std::vector<std::string> tokens_by_id);

    std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(token_of_.size()); }
    TokenId unk_id() const noexcept { return 0; }

    TokenId id_of(std::string_view token) const noexcept;
    const std::string& token_of(TokenId id) const { return token_of_.at(id); }
    bool contains(std::string_view token) const noexcept;

    // Stable content hash; stamped into model files so a model cannot be
    // queried against the wrong vocabulary.
    std::uint64_t content_hash() const noexcept;

    void save(const std::string& path) const;
    static Vocab load(const std::string& path);

    bool operator==(const Vocab& other) const noexcept { return token_of_ == other.token_of_; }

private:
    std::vector<std::string> token_of_;
    std::unordered_map<std::string, TokenId> id_of_;
};

// Splits text into lowercase word and punctuation tokens.  Punctuation
// marks are single-character tokens; contiguous letters/digits form words.
std::vector<std::string> split_tokens(std::string_view text);

// Builds a vocabulary of at most max_size entries (including unk) from raw
// documents.  Deterministic: frequency order, lexicographic tie-break.
Vocab build_vocab(const std::vector<std::string>& texts, std::uint32_t max_size);

std::vector<TokenId> tokenize(std::string_view text, const Vocab& vocab);
std::string detokenize(const std::vector<TokenId>& ids, const Vocab& vocab);

}  // namespace wmlab
