#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "metastore/core/kmer.hpp"

namespace metastore {

/// splitmix64 step; also used as the k-mer hash finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Deterministic 64-bit generator. Distribution helpers are spelled out
/// here (no std::uniform_*_distribution) so sequences are identical on
/// every platform, which the byte-identical-report contract relies on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    /// Uniform in [0, n) via 128-bit multiply (Lemire, no rejection; the
    /// tiny bias is irrelevant for test data and keeps the stream fixed).
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>((Uint128{next_u64()} * n) >> 64);
    }

    /// Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Index drawn proportionally to non-negative weights.
    std::size_t pick_weighted(std::span<const double> weights) {
        double total = 0;
        for (double w : weights) total += w;
        double r = next_double() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            r -= weights[i];
            if (r < 0) return i;
        }
        return weights.size() - 1;
    }

    PackedKmer random_kmer(int k) {
        Uint128 bits = (Uint128{next_u64()} << 64) | next_u64();
        bits &= ~Uint128{0} << (128 - 2 * k);
        return PackedKmer{bits, static_cast<std::uint8_t>(k)};
    }

private:
    std::uint64_t state_;
};

/// Order-independent 64-bit hash of a packed k-mer, used for MinHash
/// ranking. Fixed constants; never seeded.
inline std::uint64_t kmer_hash64(const PackedKmer& km) {
    auto lo = static_cast<std::uint64_t>(km.bits);
    auto hi = static_cast<std::uint64_t>(km.bits >> 64);
    return mix64(lo ^ mix64(hi ^ km.k));
}

} // namespace metastore
