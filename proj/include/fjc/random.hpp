#pragma once

#include <cstdint>
#include <random>

namespace fjc {

using Rng = std::mt19937_64;

// Helpers below avoid the <random> distributions, whose output is
// implementation-defined, so seeded runs reproduce across standard libraries.

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent generator for stream `stream` of master seed `master`.
inline Rng stream_rng(std::uint64_t master, std::uint64_t stream) {
    return Rng(splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) {
    return uniform01(rng) < p;
}

/// Uniform integer in [0, n), n > 0. Rejection sampling, no modulo bias.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n + 1) % n;
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw > limit);
    return draw % n;
}

}  // namespace fjc
