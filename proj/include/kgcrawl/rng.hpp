#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

// Deterministic hashing and random draws.
//
// Everything that feeds an observable output goes through these helpers
// instead of std::hash or std::uniform_*_distribution, both of which are
// implementation-defined and would break byte-identical runs across
// standard libraries.

namespace kgcrawl {

// Seeded FNV-1a over the bytes of `data`, finished with an avalanche mix
// so that nearby seeds do not produce correlated buckets.
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

inline std::uint64_t hash64(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = 14695981039346656037ull ^ mix64(seed + 0x9e3779b97f4a7c15ull);
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return mix64(h);
}

// Map a 64-bit hash (or raw rng draw) onto [0, 1) using the top 53 bits.
inline double unit_from_bits(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline double uniform_real01(std::mt19937_64& rng) {
    return unit_from_bits(rng());
}

// Unbiased enough for our ranges (n is always tiny next to 2^64).
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

}  // namespace kgcrawl
