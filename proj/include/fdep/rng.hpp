#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fdep/normal.hpp"

namespace fdep {

// Reproducible random streams.
//
// Every stochastic routine draws from a substream identified by
// (seed, replicate, tag). Substreams are independent mt19937_64 engines
// seeded through a splitmix64 chain, so results do not depend on worker
// count or evaluation order. Variate transforms (uniform, normal,
// shuffles) are implemented here rather than via std::*_distribution,
// whose algorithms are implementation-defined; this keeps byte-identical
// output across standard libraries.

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 substream(uint64_t seed, uint64_t replicate = 0, uint64_t tag = 0) {
    uint64_t s0 = splitmix64(seed);
    uint64_t s1 = splitmix64(s0 ^ splitmix64(replicate + 0x1234567823456789ULL));
    uint64_t s2 = splitmix64(s1 ^ splitmix64(tag + 0x0fedcba987654321ULL));
    std::seed_seq seq{static_cast<uint32_t>(s0), static_cast<uint32_t>(s0 >> 32),
                      static_cast<uint32_t>(s1), static_cast<uint32_t>(s1 >> 32),
                      static_cast<uint32_t>(s2), static_cast<uint32_t>(s2 >> 32)};
    return std::mt19937_64(seq);
}

// Uniform on the open interval (0,1): 53-bit mantissa, offset by half an ulp.
inline double uniform01(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via the inverse CDF; |z| <= 8.4 for any engine output.
inline double normal01(std::mt19937_64& rng) {
    return normal_quantile(uniform01(rng));
}

// Unbiased integer in [0, bound) by rejection.
inline uint64_t uniform_below(std::mt19937_64& rng, uint64_t bound) {
    uint64_t threshold = (0ULL - bound) % bound;
    for (;;) {
        uint64_t r = rng();
        if (r >= threshold) return r % bound;
    }
}

// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle_vector(std::vector<T>& v, std::mt19937_64& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(uniform_below(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace fdep
