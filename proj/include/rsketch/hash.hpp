#pragma once

#include <cstdint>

namespace rsketch {

// MurmurHash3 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

/// Seeded 64-bit hash of a 64-bit key. Different seeds give hash functions
/// that behave independently for sketch indexing purposes.
constexpr std::uint64_t seeded_hash(std::uint64_t seed, std::uint64_t key) {
    const std::uint64_t salt = mix64(seed + 0x9e3779b97f4a7c15ULL);
    return mix64(mix64(key ^ salt) + salt);
}

__extension__ using uint128 = unsigned __int128;

/// Maps a hash uniformly onto [0, range) without division.
inline std::uint64_t reduce(std::uint64_t hash, std::uint64_t range) {
    return static_cast<std::uint64_t>((static_cast<uint128>(hash) * range) >> 64);
}

/// Derives the seed for sub-structure `index` (a layer, a row, ...) from a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return seeded_hash(master, index);
}

}  // namespace rsketch
