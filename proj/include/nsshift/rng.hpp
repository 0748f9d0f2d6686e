#pragma once

// Counter-based deterministic randomness: every draw is a pure function of
// (seed, path index, coordinate), so the same coordinate produces the same
// bit no matter which operation asks, batches can run in any order, and runs
// are reproducible byte for byte.

#include <cstdint>
#include <string>

#include "nsshift/bigint.hpp"

namespace nsshift {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t coordinate_digest(const BigIndex& k) {
    if (fits_long(k)) return static_cast<std::uint64_t>(to_long(k));
    // rare: hash the decimal form
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : k.str()) h = (h ^ static_cast<std::uint64_t>(c)) * 0x100000001b3ULL;
    return h;
}

inline double uniform01(std::uint64_t seed, std::uint64_t path, const BigIndex& coord) {
    std::uint64_t h = splitmix64(splitmix64(splitmix64(seed) ^ coordinate_digest(coord)) ^
                                 (0x9e3779b97f4a7c15ULL * (path + 1)));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}
