#pragma once

// Counter-based random numbers. A (key, counter) pair maps to the same bits on
// every platform, so simulated paths depend only on the seed.

#include <array>
#include <cstdint>

namespace driftwatch {

/// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t z);

/// Seed for replication `index` of a campaign with `master_seed`.
/// Injective in `index` for a fixed master seed.
std::uint64_t derive_replication_seed(std::uint64_t master_seed, std::uint64_t index);

/// Stream of standard normal variates. Variate m is a pure function of
/// (seed, m): block m/2 of Philox yields two uniforms, and the Box-Muller
/// transform turns them into the pair (r cos t, r sin t).
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed, std::uint64_t first_index = 0);

    double next();
    /// Uniform on the open interval (0, 1).
    double next_uniform();
    std::uint64_t position() const { return position_; }
    std::uint64_t seed() const { return seed_; }

private:
    void refill(std::uint64_t block);

    std::uint64_t seed_;
    std::array<std::uint32_t, 2> key_;
    std::uint64_t position_;
    std::uint64_t uniform_block_ = 0;
    std::uint64_t cached_block_ = ~std::uint64_t{0};
    std::array<double, 2> cached_{};
};

}  // namespace driftwatch
