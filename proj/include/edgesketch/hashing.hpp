#pragma once

#include <cstdint>

namespace edgesketch {

// splitmix64 finalizer. Full-avalanche mixing of a 64-bit word.
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

// Column index for edge (u,v) in hash row `row`, over `w` columns.
// Deterministic for a fixed (seed,row,u,v,w); rows use independently derived
// seeds so the d rows behave as separate hash functions.
inline std::uint32_t hash_edge(std::uint64_t seed, std::uint32_t row,
                               std::uint64_t u, std::uint64_t v,
                               std::uint32_t w) {
    const std::uint64_t row_seed = mix64(seed + 0x9e3779b97f4a7c15ULL * (std::uint64_t{row} + 1));
    std::uint64_t h = mix64(row_seed ^ (u + 0xc2b2ae3d27d4eb4fULL));
    h = mix64(h ^ (v + 0x165667b19e3779f9ULL));
    return static_cast<std::uint32_t>(h % w);
}

} // namespace edgesketch
