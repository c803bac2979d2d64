#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "metastore/core/errors.hpp"
#include "metastore/core/kmer.hpp"

namespace metastore {

/// Streaming cursor for a smaller-k table, driven by the k_max stream.
///
/// Feeding consecutive top-table entries advances the position exactly when
/// the k2-prefix changes, so after entry i the position equals the number
/// of distinct k2-prefixes seen so far minus one.
class IndexGenerator {
public:
    explicit IndexGenerator(int k2) : k2_(k2) {}

    /// Returns true when the position advanced (never on the first entry).
    bool feed(const PackedKmer& kmer) {
        PackedKmer p = kmer.prefix(k2_);
        if (position_ < 0) {
            position_ = 0;
            prefix_ = p;
            return false;
        }
        if (p == prefix_) return false;
        prefix_ = p;
        ++position_;
        return true;
    }

    /// Current smaller-k table position; -1 before the first entry.
    std::int64_t position() const { return position_; }

    int k2() const { return k2_; }

private:
    int k2_;
    std::int64_t position_ = -1;
    PackedKmer prefix_;
};

/// Position after each entry of a sorted k_max table, for a given k2.
inline std::vector<std::int64_t> index_positions(std::span<const PackedKmer> top_table_kmers, int k2) {
    IndexGenerator gen(k2);
    std::vector<std::int64_t> out;
    out.reserve(top_table_kmers.size());
    for (const PackedKmer& km : top_table_kmers) {
        gen.feed(km);
        out.push_back(gen.position());
    }
    return out;
}

} // namespace metastore
