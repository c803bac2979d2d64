#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "metastore/core/bytes.hpp"
#include "metastore/core/errors.hpp"
#include "metastore/core/kmer.hpp"
#include "metastore/db/species_index.hpp"

namespace metastore {

/// Merged multi-species k-mer -> location index. Locations of taxon i are
/// rebased by offsets[i] (prefix sums of genome lengths), so a location
/// alone identifies its taxon.
struct UnifiedIndex {
    struct Entry {
        PackedKmer kmer;
        std::vector<std::uint64_t> locations; // ascending (taxa order)
    };

    int k = 0;
    std::vector<TaxId> taxa_order;
    std::vector<std::uint64_t> offsets; // size taxa_order.size() + 1, offsets[0] = 0
    std::vector<Entry> entries;         // strictly increasing by k-mer

    /// Locations of a k-mer, or an empty span when absent.
    std::span<const std::uint64_t> lookup(const PackedKmer& km) const {
        auto it = std::lower_bound(entries.begin(), entries.end(), km,
                                   [](const Entry& e, const PackedKmer& x) { return e.kmer < x; });
        if (it == entries.end() || !(it->kmer == km)) return {};
        return it->locations;
    }

    /// Taxon owning a rebased location.
    TaxId taxon_of(std::uint64_t location) const {
        auto it = std::upper_bound(offsets.begin(), offsets.end(), location);
        std::size_t i = static_cast<std::size_t>(it - offsets.begin()) - 1;
        return taxa_order[i];
    }
};

/// Sequential k-way merge of pre-sorted species indexes, in taxa order.
/// Shared k-mers carry every rebased location.
inline UnifiedIndex merge_indexes(std::span<const SpeciesIndex> indexes) {
    UnifiedIndex out;
    if (indexes.empty()) return out;
    out.k = indexes.front().k;
    out.offsets.push_back(0);
    for (const SpeciesIndex& idx : indexes) {
        if (idx.k != out.k)
            throw ConfigError("species index k=" + std::to_string(idx.k) + " != merge k=" + std::to_string(out.k));
        out.taxa_order.push_back(idx.tax);
        out.offsets.push_back(out.offsets.back() + idx.genome_length);
    }

    std::vector<std::size_t> cursor(indexes.size(), 0);
    for (;;) {
        bool any = false;
        PackedKmer next;
        for (std::size_t i = 0; i < indexes.size(); ++i) {
            if (cursor[i] == indexes[i].entries.size()) continue;
            const PackedKmer& km = indexes[i].entries[cursor[i]].kmer;
            if (!any || km < next) {
                next = km;
                any = true;
            }
        }
        if (!any) break;
        UnifiedIndex::Entry entry;
        entry.kmer = next;
        for (std::size_t i = 0; i < indexes.size(); ++i) {
            while (cursor[i] < indexes[i].entries.size() && indexes[i].entries[cursor[i]].kmer == next) {
                entry.locations.push_back(indexes[i].entries[cursor[i]].location + out.offsets[i]);
                ++cursor[i];
            }
        }
        out.entries.push_back(std::move(entry));
    }
    return out;
}

namespace detail {
inline constexpr char kUidxMagic[4] = {'M', 'S', 'U', 'X'};
inline constexpr std::uint16_t kUidxVersion = 1;
} // namespace detail

inline std::string serialize_unified_index(const UnifiedIndex& idx) {
    ByteWriter w;
    w.raw({detail::kUidxMagic, 4});
    w.u16(detail::kUidxVersion);
    w.u8(static_cast<std::uint8_t>(idx.k));
    w.u8(0);
    w.u64(idx.taxa_order.size());
    for (TaxId t : idx.taxa_order) w.u32(t.value);
    for (std::uint64_t off : idx.offsets) w.u64(off);
    w.u64(idx.entries.size());
    for (const auto& e : idx.entries) {
        w.u128(e.kmer.bits);
        w.u32(static_cast<std::uint32_t>(e.locations.size()));
        for (std::uint64_t loc : e.locations) w.u64(loc);
    }
    return w.take();
}

inline UnifiedIndex deserialize_unified_index(std::string_view data, const std::string& what = "UIDX") {
    ByteReader r(data);
    if (r.raw(4) != std::string_view{detail::kUidxMagic, 4}) throw ParseError("not an MSUX file: " + what);
    if (r.u16() != detail::kUidxVersion) throw ParseError("unsupported MSUX version: " + what);
    UnifiedIndex idx;
    idx.k = r.u8();
    r.u8();
    std::uint64_t taxa = r.u64();
    for (std::uint64_t i = 0; i < taxa; ++i) idx.taxa_order.push_back(TaxId{r.u32()});
    for (std::uint64_t i = 0; i < taxa + 1; ++i) idx.offsets.push_back(r.u64());
    std::uint64_t count = r.u64();
    idx.entries.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        UnifiedIndex::Entry e;
        e.kmer = PackedKmer{r.u128(), static_cast<std::uint8_t>(idx.k)};
        std::uint32_t n = r.u32();
        e.locations.reserve(n);
        for (std::uint32_t j = 0; j < n; ++j) e.locations.push_back(r.u64());
        idx.entries.push_back(std::move(e));
    }
    return idx;
}

inline void save_unified_index(const UnifiedIndex& idx, const std::filesystem::path& path) {
    write_file(path, serialize_unified_index(idx));
}

inline UnifiedIndex load_unified_index(const std::filesystem::path& path) {
    return deserialize_unified_index(read_file(path), path.string());
}

} // namespace metastore
