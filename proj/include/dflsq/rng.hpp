#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dflsq::rng {

// splitmix64 finalizer; bijective on 64-bit words
inline constexpr std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// keyed counter hash: value is a pure function of (seed, ordinal, idx)
inline constexpr std::uint64_t hash3(std::uint64_t seed, std::uint64_t ordinal, std::uint64_t idx) {
    std::uint64_t h = mix(seed);
    h = mix(h ^ ordinal);
    h = mix(h ^ idx);
    return h;
}

// uniform in the open interval (0, 1); never returns an endpoint
inline double uniform01(std::uint64_t seed, std::uint64_t ordinal, std::uint64_t idx) {
    const std::uint64_t bits = hash3(seed, ordinal, idx) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

// standard normal via Box-Muller; deterministic in (seed, ordinal, idx)
inline double normal(std::uint64_t seed, std::uint64_t ordinal, std::uint64_t idx) {
    const double u1 = uniform01(seed, ordinal, 2 * idx);
    const double u2 = uniform01(seed, ordinal, 2 * idx + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace dflsq::rng
