#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "metastore/core/bytes.hpp"
#include "metastore/core/errors.hpp"
#include "metastore/core/kmer.hpp"
#include "metastore/util/rng.hpp"

namespace metastore {

/// Sketch members for one taxon; each member's own `k` selects its level.
using PerTaxonSketches = std::map<TaxId, std::vector<PackedKmer>>;

using TaxList = std::vector<TaxId>; // always sorted ascending, unique

/// K-mer Sketch Streaming structure.
///
/// The top table holds the sorted k_max sketch members with their taxa.
/// For each smaller k-level there is one extras list per DISTINCT k-prefix
/// of the top table, in first-occurrence (= sorted) order, holding only the
/// taxa that sketched that smaller k-mer but are NOT already attributed to
/// a top entry with the same prefix. Smaller k-mers sketched by some taxon
/// that are not a prefix of any top entry go to a per-level overflow table
/// so retrieval cannot silently drop them.
struct KssSketch {
    struct TopEntry {
        PackedKmer kmer;
        TaxList taxa;
    };
    struct OverflowEntry {
        PackedKmer kmer; // length = the level's k
        TaxList taxa;
    };

    std::vector<int> k_levels;                             // strictly decreasing, [0] = k_max
    std::vector<TopEntry> top_table;                       // strictly increasing by k-mer
    std::vector<std::vector<TaxList>> extras_tables;       // [level-1][prefix position]
    std::vector<std::vector<OverflowEntry>> overflow_tables; // [level-1], sorted by k-mer
    std::map<std::pair<TaxId, int>, std::uint64_t> sketch_sizes; // (tax, k) -> member count

    int k_max() const { return k_levels.front(); }

    std::uint64_t sketch_size(TaxId tax, int k) const {
        auto it = sketch_sizes.find({tax, k});
        return it == sketch_sizes.end() ? 0 : it->second;
    }

    /// Taxa for (k, prefix): extras ∪ overflow ∪ taxa of top entries with
    /// that prefix. Reference semantics for tests and oracles; retrieval
    /// proper streams (see isp/retrieve.hpp).
    TaxList reconstruct(int k, const PackedKmer& prefix) const;
};

namespace detail {

inline TaxList to_tax_list(const std::set<TaxId>& s) { return TaxList(s.begin(), s.end()); }

inline TaxList merge_tax_lists(const TaxList& a, const TaxList& b) {
    TaxList out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

} // namespace detail

inline TaxList KssSketch::reconstruct(int k, const PackedKmer& prefix) const {
    std::size_t level = 0;
    for (std::size_t i = 1; i < k_levels.size(); ++i)
        if (k_levels[i] == k) level = i;
    if (level == 0) throw ConfigError("k=" + std::to_string(k) + " is not a smaller KSS level");

    std::set<TaxId> taxa;
    // Top entries sharing the prefix form one contiguous run.
    std::size_t pos = 0;
    bool in_run = false;
    PackedKmer run_prefix;
    for (const TopEntry& e : top_table) {
        PackedKmer p = e.kmer.prefix(k);
        if (!in_run || p != run_prefix) {
            if (in_run) ++pos;
            run_prefix = p;
            in_run = true;
        }
        if (p == prefix) {
            taxa.insert(e.taxa.begin(), e.taxa.end());
            for (TaxId t : extras_tables[level - 1][pos]) taxa.insert(t);
        }
    }
    const auto& overflow = overflow_tables[level - 1];
    auto it = std::lower_bound(overflow.begin(), overflow.end(), prefix,
                               [](const OverflowEntry& e, const PackedKmer& p) { return e.kmer < p; });
    if (it != overflow.end() && it->kmer == prefix) taxa.insert(it->taxa.begin(), it->taxa.end());
    return detail::to_tax_list(taxa);
}

/// Builds the KSS from per-taxon sketches. Every sketch member's k must be
/// one of `k_levels` (strictly decreasing, starting at k_max).
inline KssSketch build_kss(const PerTaxonSketches& sketches, std::span<const int> k_levels) {
    if (k_levels.empty()) throw BuildError("k_levels is empty");
    for (std::size_t i = 1; i < k_levels.size(); ++i)
        if (k_levels[i] >= k_levels[i - 1]) throw BuildError("k_levels must be strictly decreasing");

    KssSketch kss;
    kss.k_levels.assign(k_levels.begin(), k_levels.end());
    const int k_max = k_levels[0];

    // Distinct member counts per (tax, k); also validates levels.
    std::map<PackedKmer, std::set<TaxId>> top;
    std::vector<std::map<PackedKmer, std::set<TaxId>>> smaller(k_levels.size() > 0 ? k_levels.size() - 1 : 0);
    for (const auto& [tax, members] : sketches) {
        if (tax == kUnclassified) throw BuildError("tax ID 0 is reserved");
        std::set<PackedKmer> distinct(members.begin(), members.end());
        std::map<int, std::uint64_t> per_k;
        for (const PackedKmer& km : distinct) {
            auto lv = std::find(kss.k_levels.begin(), kss.k_levels.end(), static_cast<int>(km.k));
            if (lv == kss.k_levels.end())
                throw BuildError("sketch k=" + std::to_string(km.k) + " is not a configured level");
            per_k[km.k] += 1;
            if (km.k == k_max)
                top[km].insert(tax);
            else
                smaller[static_cast<std::size_t>(lv - kss.k_levels.begin()) - 1][km].insert(tax);
        }
        for (const auto& [k, n] : per_k) kss.sketch_sizes[{tax, k}] = n;
    }

    kss.top_table.reserve(top.size());
    for (const auto& [km, taxa] : top) kss.top_table.push_back({km, detail::to_tax_list(taxa)});

    for (std::size_t li = 1; li < kss.k_levels.size(); ++li) {
        const int k = kss.k_levels[li];
        auto& sketched = smaller[li - 1];
        std::vector<TaxList> extras;
        // Walk distinct top prefixes in order; extras(p) = sketched(p) minus
        // the union of taxa attributed to top entries with prefix p.
        std::size_t i = 0;
        while (i < kss.top_table.size()) {
            PackedKmer p = kss.top_table[i].kmer.prefix(k);
            std::set<TaxId> top_union;
            std::size_t j = i;
            while (j < kss.top_table.size() && kss.top_table[j].kmer.prefix(k) == p) {
                top_union.insert(kss.top_table[j].taxa.begin(), kss.top_table[j].taxa.end());
                ++j;
            }
            TaxList entry;
            if (auto it = sketched.find(p); it != sketched.end()) {
                std::set_difference(it->second.begin(), it->second.end(), top_union.begin(), top_union.end(),
                                    std::back_inserter(entry));
                sketched.erase(it);
            }
            extras.push_back(std::move(entry));
            i = j;
        }
        std::vector<KssSketch::OverflowEntry> overflow;
        overflow.reserve(sketched.size());
        for (const auto& [km, taxa] : sketched) overflow.push_back({km, detail::to_tax_list(taxa)});
        kss.extras_tables.push_back(std::move(extras));
        kss.overflow_tables.push_back(std::move(overflow));
    }
    return kss;
}

namespace detail {

inline constexpr char kKssMagic[4] = {'M', 'S', 'K', 'S'};
inline constexpr std::uint16_t kKssVersion = 1;

inline void write_tax_list(ByteWriter& w, const TaxList& taxa) {
    w.u32(static_cast<std::uint32_t>(taxa.size()));
    for (TaxId t : taxa) w.u32(t.value);
}

inline TaxList read_tax_list(ByteReader& r) {
    std::uint32_t n = r.u32();
    TaxList taxa;
    taxa.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) taxa.push_back(TaxId{r.u32()});
    return taxa;
}

inline void write_sketch_sizes(ByteWriter& w, const std::map<std::pair<TaxId, int>, std::uint64_t>& sizes) {
    w.u64(sizes.size());
    for (const auto& [key, n] : sizes) {
        w.u32(key.first.value);
        w.u32(static_cast<std::uint32_t>(key.second));
        w.u64(n);
    }
}

} // namespace detail

inline std::string serialize_kss(const KssSketch& kss) {
    ByteWriter w;
    w.raw({detail::kKssMagic, 4});
    w.u16(detail::kKssVersion);
    w.u16(static_cast<std::uint16_t>(kss.k_levels.size()));
    for (int k : kss.k_levels) w.u8(static_cast<std::uint8_t>(k));
    w.u64(kss.top_table.size());
    for (const auto& e : kss.top_table) {
        w.u128(e.kmer.bits);
        detail::write_tax_list(w, e.taxa);
    }
    for (const auto& extras : kss.extras_tables) {
        w.u64(extras.size());
        for (const TaxList& taxa : extras) detail::write_tax_list(w, taxa);
    }
    for (const auto& overflow : kss.overflow_tables) {
        w.u64(overflow.size());
        for (const auto& e : overflow) {
            w.u128(e.kmer.bits);
            detail::write_tax_list(w, e.taxa);
        }
    }
    detail::write_sketch_sizes(w, kss.sketch_sizes);
    return w.take();
}

inline KssSketch deserialize_kss(std::string_view data, const std::string& what = "KSS") {
    ByteReader r(data);
    if (r.raw(4) != std::string_view{detail::kKssMagic, 4}) throw ParseError("not an MSKS file: " + what);
    if (r.u16() != detail::kKssVersion) throw ParseError("unsupported MSKS version: " + what);
    KssSketch kss;
    std::uint16_t levels = r.u16();
    for (std::uint16_t i = 0; i < levels; ++i) kss.k_levels.push_back(r.u8());
    std::uint64_t top_count = r.u64();
    kss.top_table.reserve(top_count);
    for (std::uint64_t i = 0; i < top_count; ++i) {
        PackedKmer km{r.u128(), static_cast<std::uint8_t>(kss.k_levels[0])};
        kss.top_table.push_back({km, detail::read_tax_list(r)});
    }
    for (std::uint16_t li = 1; li < levels; ++li) {
        std::uint64_t n = r.u64();
        std::vector<TaxList> extras;
        extras.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) extras.push_back(detail::read_tax_list(r));
        kss.extras_tables.push_back(std::move(extras));
    }
    for (std::uint16_t li = 1; li < levels; ++li) {
        std::uint64_t n = r.u64();
        std::vector<KssSketch::OverflowEntry> overflow;
        overflow.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            PackedKmer km{r.u128(), static_cast<std::uint8_t>(kss.k_levels[li])};
            overflow.push_back({km, detail::read_tax_list(r)});
        }
        kss.overflow_tables.push_back(std::move(overflow));
    }
    std::uint64_t size_count = r.u64();
    for (std::uint64_t i = 0; i < size_count; ++i) {
        TaxId tax{r.u32()};
        int k = static_cast<int>(r.u32());
        kss.sketch_sizes[{tax, k}] = r.u64();
    }
    return kss;
}

inline void save_kss(const KssSketch& kss, const std::filesystem::path& path) {
    write_file(path, serialize_kss(kss));
}

inline KssSketch load_kss(const std::filesystem::path& path) {
    return deserialize_kss(read_file(path), path.string());
}

/// Serialized size of the per-level flat encoding of the same sketches:
/// every level stores full (16-byte k-mer, taxon list) rows. Shares the
/// container layout with serialize_kss so the two sizes are comparable.
inline std::uint64_t flat_table_bytes(const PerTaxonSketches& sketches, std::span<const int> k_levels) {
    std::map<int, std::map<PackedKmer, std::set<TaxId>>> flat;
    for (const auto& [tax, members] : sketches)
        for (const PackedKmer& km : members) flat[km.k][km].insert(tax);
    std::uint64_t bytes = 4 + 2 + 2 + k_levels.size(); // magic, version, level count, k values
    for (int k : k_levels) {
        bytes += 8; // row count
        for (const auto& [km, taxa] : flat[k]) {
            (void)km;
            bytes += kKmerBytes + 4 + 4 * taxa.size();
        }
    }
    std::set<std::pair<TaxId, int>> size_keys;
    for (const auto& [tax, members] : sketches) {
        std::set<int> ks;
        for (const PackedKmer& km : members) ks.insert(km.k);
        for (int k : ks) size_keys.insert({tax, k});
    }
    bytes += 8 + 16 * size_keys.size();
    return bytes;
}

/// Bottom-`s` MinHash sketch of a genome's distinct k_max-mers, ranked by
/// kmer_hash64 with the k-mer value as tie-breaker. Smaller levels are the
/// distinct prefixes of the selected k_max members (the multi-resolution
/// containment scheme: one top set, truncated per level).
inline std::vector<PackedKmer> make_minhash_sketch(std::span<const std::string> records,
                                                   std::span<const int> k_levels, std::size_t s) {
    if (k_levels.empty()) throw BuildError("k_levels is empty");
    const int k_max = k_levels[0];
    std::set<PackedKmer> distinct;
    for (const std::string& seq : records)
        for_each_valid_kmer(seq, k_max, [&](PackedKmer km) { distinct.insert(km); });

    std::vector<PackedKmer> all(distinct.begin(), distinct.end());
    auto by_hash = [](const PackedKmer& a, const PackedKmer& b) {
        std::uint64_t ha = kmer_hash64(a), hb = kmer_hash64(b);
        if (ha != hb) return ha < hb;
        return a < b;
    };
    if (all.size() > s) {
        std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(s), all.end(), by_hash);
        all.resize(s);
    }
    std::sort(all.begin(), all.end());

    std::vector<PackedKmer> out = all;
    for (std::size_t li = 1; li < k_levels.size(); ++li) {
        std::set<PackedKmer> prefixes;
        for (const PackedKmer& km : all) prefixes.insert(km.prefix(k_levels[li]));
        out.insert(out.end(), prefixes.begin(), prefixes.end());
    }
    return out;
}

} // namespace metastore
