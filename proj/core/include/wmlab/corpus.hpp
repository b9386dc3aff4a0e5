#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wmlab/vocab.hpp"

namespace wmlab {

enum class SourceLabel : std::uint8_t { human, watermarked, attacked };

struct TokenSeq {
    std::vector<TokenId> ids;
    SourceLabel source_label = SourceLabel::human;

    std::size_t size() const noexcept { return ids.size(); }
    bool empty() const noexcept { return ids.empty(); }
};

// Relative token frequencies over the whole vocabulary.
struct TokenFrequencies {
    std::vector<double> rel_freq;       // indexed by token id, sums to 1
    std::vector<std::uint64_t> counts;  // raw occurrence counts
    std::uint64_t total_tokens = 0;
};

// Documents are blank-line separated blocks of UTF-8 text.
std::vector<std::string> read_documents(const std::string& path);
std::vector<std::string> split_documents(const std::string& text);
void write_documents(const std::string& path, const std::vector<std::string>& docs);

std::vector<TokenSeq> tokenize_documents(const std::vector<std::string>& docs, const Vocab& vocab,
                                         SourceLabel label = SourceLabel::human);

TokenFrequencies token_frequencies(const std::vector<TokenSeq>& docs, std::uint32_t vocab_size);

// Frequencies of a prefix of the corpus: the first `budget` tokens in
// document order.  Throws if the corpus is shorter than the budget.
TokenFrequencies token_frequencies_prefix(const std::vector<TokenSeq>& docs,
                                          std::uint32_t vocab_size, std::uint64_t budget);

}  // namespace wmlab
