#include "wmlab/rng.hpp"

#include <bit>
#include <cmath>

namespace wmlab {

std::uint64_t hash_bytes(std::string_view bytes) noexcept {
    // FNV-1a, then one avalanche pass so short labels diffuse fully.
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return mix64(h);
}

double Rng::next_gaussian() noexcept {
    // Box-Muller on two fresh uniforms; one value per call keeps the
    // draw count predictable for reproducibility audits.
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

std::uint64_t seed_stream(std::uint64_t master_seed, std::string_view stage_label,
                          std::uint64_t index) noexcept {
    return mix64(mix64(master_seed, hash_bytes(stage_label)), index);
}

SlotPermutation::SlotPermutation(std::uint64_t key, std::uint32_t domain)
    : domain_(domain) {
    unsigned bits = std::max(2u, static_cast<unsigned>(std::bit_width(domain > 1 ? domain - 1 : 1u)));
    half_bits_ = (bits + 1) / 2;
    half_mask_ = (1u << half_bits_) - 1u;
    for (int r = 0; r < 4; ++r) {
        round_keys_[r] = mix64(key, 0xF00Dull + static_cast<std::uint64_t>(r));
    }
}

std::uint32_t SlotPermutation::encrypt_once(std::uint32_t value) const noexcept {
    std::uint32_t left = value >> half_bits_;
    std::uint32_t right = value & half_mask_;
    for (int r = 0; r < 4; ++r) {
        std::uint32_t f = static_cast<std::uint32_t>(mix64(round_keys_[r], right)) & half_mask_;
        std::uint32_t next_left = right;
        right = left ^ f;
        left = next_left;
    }
    return (left << half_bits_) | right;
}

std::uint32_t SlotPermutation::slot_of(std::uint32_t value) const noexcept {
    // Cycle-walk: the Feistel block is a power of four, re-encrypt until we
    // land inside the domain.  Terminates because the walk is a permutation
    // cycle visiting each block value at most once.
    std::uint32_t v = encrypt_once(value);
    while (v >= domain_) v = encrypt_once(v);
    return v;
}

}  // namespace wmlab
