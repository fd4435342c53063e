#pragma once

#include <cstdint>
#include <random>

namespace pmdeg {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent child seed for stream `index` of `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x51ED270B2A1C4F3DULL));
}

inline std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream = 0) {
    return std::mt19937_64(derive_seed(seed, stream));
}

/// Uniform double in [0, 1) from the top 53 bits; stable across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace pmdeg
