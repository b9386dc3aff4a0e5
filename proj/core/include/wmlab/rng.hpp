#pragma once

#include <cstdint>
#include <string_view>

namespace wmlab {

// Deterministic pseudo-random primitives shared by every module.  The
// constants below are fixed for the life of the file formats: masks,
// generations and reports are reproducible bit-for-bit from seeds alone.

// 64-bit avalanche mixer (splitmix64 finalizer).
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept {
    return mix64(a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2)));
}

std::uint64_t hash_bytes(std::string_view bytes) noexcept;

// Counter-based stream: state advances by a fixed increment, outputs are
// avalanche-mixed.  Cheap to fork, no warm-up, full 2^64 period.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : state_(mix64(seed)) {}

    std::uint64_t next_u64() noexcept {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double next_double() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, n) via rejection-free Lemire reduction.
    std::uint32_t next_below(std::uint32_t n) noexcept {
        const std::uint64_t x = next_u64() >> 32;
        return static_cast<std::uint32_t>((x * n) >> 32);
    }

    double next_gaussian() noexcept;

    // Independent stream derived from the current state; drawing from the
    // fork does not disturb this stream.
    Rng fork(std::uint64_t salt) noexcept { return Rng(mix64(state_, salt)); }

private:
    std::uint64_t state_;
};

// Collision-resistant seed derivation: (master, stage label, index) -> seed.
// Changing any component changes the result; stages are independent.
std::uint64_t seed_stream(std::uint64_t master_seed, std::string_view stage_label,
                          std::uint64_t index) noexcept;

// Keyed pseudo-random permutation over [0, domain).  A balanced 4-round
// Feistel network on 2*ceil(b/2) bits, cycle-walked down to the domain.
// Used to carve exact-size green lists out of the vocabulary: the image of
// token v under the permutation is its slot, and slots below the green
// count are green.  O(1) membership, no materialized table.
class SlotPermutation {
public:
    SlotPermutation(std::uint64_t key, std::uint32_t domain);

    std::uint32_t domain() const noexcept { return domain_; }

    std::uint32_t slot_of(std::uint32_t value) const noexcept;

private:
    std::uint32_t encrypt_once(std::uint32_t value) const noexcept;

    std::uint64_t round_keys_[4];
    std::uint32_t domain_;
    std::uint32_t half_bits_;
    std::uint32_t half_mask_;
};

}  // namespace wmlab
