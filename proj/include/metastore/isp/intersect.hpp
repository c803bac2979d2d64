#pragma once

#include <span>
#include <string>
#include <vector>

#include "metastore/core/errors.hpp"
#include "metastore/core/kmer.hpp"

namespace metastore {

/// Single-pass sorted-stream intersection.
///
/// Mirrors the per-channel comparator with two k-mer registers: the
/// database cursor holds its head while it exceeds the query head, and each
/// element of either stream is read exactly once. Both inputs must be
/// strictly increasing; a violation raises OrderError naming the stream and
/// the offending position.
inline std::vector<PackedKmer> stream_intersect(std::span<const PackedKmer> query,
                                                std::span<const PackedKmer> db) {
    if (!query.empty() && !db.empty() && query.front().k != db.front().k)
        throw ConfigError("query k=" + std::to_string(query.front().k) +
                          " != database k=" + std::to_string(db.front().k));

    auto check_order = [](std::span<const PackedKmer> s, std::size_t i, const char* name) {
        if (i > 0 && !(s[i - 1] < s[i]))
            throw OrderError(std::string(name) + " stream not strictly increasing at position " + std::to_string(i));
    };

    std::vector<PackedKmer> out;
    std::size_t qi = 0, di = 0;
    while (qi < query.size() && di < db.size()) {
        check_order(query, qi, "query");
        check_order(db, di, "database");
        if (query[qi] == db[di]) {
            out.push_back(query[qi]);
            ++qi;
            ++di;
        } else if (query[qi] < db[di]) {
            ++qi; // query k-mer smaller: read the next query k-mer
        } else {
            ++di; // query k-mer larger: read the next database k-mer
        }
    }
    // Validate the unconsumed tails as well so unsorted input never passes.
    for (; qi < query.size(); ++qi) check_order(query, qi, "query");
    for (; di < db.size(); ++di) check_order(db, di, "database");
    return out;
}

} // namespace metastore
