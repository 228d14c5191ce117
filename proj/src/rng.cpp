#include "driftwatch/rng.hpp"

#include <cmath>
#include <numbers>

namespace driftwatch {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

// 53 random bits mapped to the midpoints of a uniform grid on (0, 1).
double to_open_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t join(std::uint32_t hi, std::uint32_t lo) {
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t derive_replication_seed(std::uint64_t master_seed, std::uint64_t index) {
    // index * odd constant is a bijection mod 2^64, and so is mix64.
    return mix64(mix64(master_seed) + index * 0x9E3779B97F4A7C15ull);
}

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t first_index)
    : seed_(seed),
      key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      position_(first_index) {}

void NormalStream::refill(std::uint64_t block) {
    const auto out = philox4x32(
        {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32), 0u, 0u}, key_);
    const double u1 = to_open_unit(join(out[0], out[1]));
    const double u2 = to_open_unit(join(out[2], out[3]));
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = {radius * std::cos(angle), radius * std::sin(angle)};
    cached_block_ = block;
}

double NormalStream::next() {
    const std::uint64_t block = position_ >> 1;
    if (block != cached_block_) refill(block);
    const double z = cached_[position_ & 1u];
    ++position_;
    return z;
}

double NormalStream::next_uniform() {
    // Uniforms draw from a separate counter lane so they never alias normals.
    const auto out = philox4x32({static_cast<std::uint32_t>(uniform_block_),
                                 static_cast<std::uint32_t>(uniform_block_ >> 32), 1u, 0u},
                                key_);
    ++uniform_block_;
    return to_open_unit(join(out[0], out[1]));
}

}  // namespace driftwatch
