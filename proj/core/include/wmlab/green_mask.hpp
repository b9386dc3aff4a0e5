#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wmlab/vocab.hpp"

namespace wmlab {

// Bit vector over the vocabulary marking green tokens.
class GreenMask {
public:
    GreenMask() = default;
    explicit GreenMask(std::uint32_t size) : bits_((size + 63) / 64, 0), size_(size) {}

    static GreenMask from_green_ids(std::uint32_t size, const std::vector<TokenId>& ids);

    std::uint32_t size() const noexcept { return size_; }
    std::uint32_t green_count() const noexcept { return green_count_; }

    bool is_green(TokenId id) const noexcept {
        return (bits_[id >> 6] >> (id & 63)) & 1u;
    }

    void set_green(TokenId id) {
        std::uint64_t& word = bits_[id >> 6];
        const std::uint64_t bit = 1ull << (id & 63);
        if (!(word & bit)) {
            word |= bit;
            ++green_count_;
        }
    }

    std::vector<TokenId> green_ids() const;

    // One sorted green token id per line.
    void save(const std::string& path) const;
    static GreenMask load(const std::string& path, std::uint32_t size);

    bool operator==(const GreenMask& other) const noexcept {
        return size_ == other.size_ && bits_ == other.bits_;
    }

private:
    std::vector<std::uint64_t> bits_;
    std::uint32_t size_ = 0;
    std::uint32_t green_count_ = 0;
};

}  // namespace wmlab
