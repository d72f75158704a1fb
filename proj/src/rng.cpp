#include "cosafed/rng.hpp"

#include <cmath>

namespace cosafed {

std::uint64_t mix64(std::uint64_t x) noexcept {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose,
                          std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t h = mix64(master ^ 0x6a09e667f3bcc908ULL);
  h = mix64(h ^ purpose);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  return h;
}

RngStream make_stream(std::uint64_t master, std::uint64_t purpose,
                      std::uint64_t a, std::uint64_t b) {
  return RngStream(derive_seed(master, purpose, a, b));
}

double uniform_unit(RngStream& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_below(RngStream& rng, std::uint64_t bound) {
  // rejection sampling over the largest multiple of bound
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

double normal_unit(RngStream& rng) {
  double u1;
  do {
    u1 = uniform_unit(rng);
  } while (u1 <= 0.0);
  const double u2 = uniform_unit(rng);
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace cosafed
