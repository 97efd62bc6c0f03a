#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rssitrack {

// splitmix64 finalizer; good avalanche for deriving stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// All randomness flows from one master seed through named sub-streams, so
// experiment arms that share a seed see identical environment noise.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::string_view name) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ fnv1a64(name)));
}

}  // namespace rssitrack
