#pragma once

#include <cstdint>
#include <random>

namespace cosafed {

using RngStream = std::mt19937_64;

// Stream purposes. Every random decision in a run draws from a stream
// derived as mix(master_seed, purpose, a, b), so parallel execution order
// cannot change results.
inline constexpr std::uint64_t kSeedInit = 1;
inline constexpr std::uint64_t kSeedSelect = 2;
inline constexpr std::uint64_t kSeedSgd = 3;
inline constexpr std::uint64_t kSeedNoise = 4;
inline constexpr std::uint64_t kSeedPartition = 5;

std::uint64_t mix64(std::uint64_t x) noexcept;

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose,
                          std::uint64_t a = 0, std::uint64_t b = 0) noexcept;

RngStream make_stream(std::uint64_t master, std::uint64_t purpose,
                      std::uint64_t a = 0, std::uint64_t b = 0);

/// Uniform double in [0, 1) with 53-bit resolution.
double uniform_unit(RngStream& rng);

/// Uniform integer in [0, bound) without modulo bias.
std::uint64_t uniform_below(RngStream& rng, std::uint64_t bound);

/// Standard normal draw (Box-Muller; no implementation-defined stdlib
/// distributions, so streams replay identically everywhere).
double normal_unit(RngStream& rng);

/// Seeded Fisher-Yates shuffle with the portable integer draw above.
template <typename Container>
void shuffle_seeded(Container& c, RngStream& rng) {
  for (std::size_t i = c.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(c[i - 1], c[j]);
  }
}

}  // namespace cosafed
