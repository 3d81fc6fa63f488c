/// @file  rng.hpp
/// @brief Deterministic sampling helpers.
///
/// Standard-library distributions are implementation-defined, so everything
/// that must reproduce byte-identically across toolchains draws through these.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rckl {

/// splitmix64 finalizer; used to derive independent seed streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for sub-stream `stream` of a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream));
}

/// Uniform integer in [0, bound), bound >= 1. Rejection sampling, unbiased.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal draw via the Marsaglia polar method.
inline double gaussian(std::mt19937_64& rng) {
  for (;;) {
    const double u = 2.0 * uniform_unit(rng) - 1.0;
    const double v = 2.0 * uniform_unit(rng) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

}  // namespace rckl
