#pragma once

#include <algorithm>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "metastore/core/bytes.hpp"
#include "metastore/core/errors.hpp"
#include "metastore/core/kmer.hpp"

namespace metastore {

/// Pre-sorted (k-mer, location) index of one species' reference genome.
/// Locations are base offsets into the genome; for multi-record references
/// the offset is cumulative across records and windows never span records.
struct SpeciesIndex {
    struct Entry {
        PackedKmer kmer;
        std::uint64_t location = 0;

        auto operator<=>(const Entry&) const = default;
    };

    TaxId tax;
    std::uint64_t genome_length = 0;
    int k = 0;
    std::vector<Entry> entries; // sorted by k-mer, then location
};

inline SpeciesIndex build_species_index(std::span<const std::string> records, TaxId tax, int k) {
    SpeciesIndex idx;
    idx.tax = tax;
    idx.k = k;
    for (const std::string& seq : records) {
        std::uint64_t base = idx.genome_length;
        for_each_valid_kmer(seq, k, [&](PackedKmer km, std::size_t offset) {
            idx.entries.push_back({km, base + offset});
        });
        idx.genome_length += seq.size();
    }
    std::sort(idx.entries.begin(), idx.entries.end());
    return idx;
}

inline SpeciesIndex build_species_index(const std::string& sequence, TaxId tax, int k) {
    return build_species_index(std::span<const std::string>{&sequence, 1}, tax, k);
}

namespace detail {
inline constexpr char kSidxMagic[4] = {'M', 'S', 'I', 'X'};
inline constexpr std::uint16_t kSidxVersion = 1;
} // namespace detail

inline std::string serialize_species_index(const SpeciesIndex& idx) {
    ByteWriter w;
    w.raw({detail::kSidxMagic, 4});
    w.u16(detail::kSidxVersion);
    w.u8(static_cast<std::uint8_t>(idx.k));
    w.u8(0);
    w.u32(idx.tax.value);
    w.u64(idx.genome_length);
    w.u64(idx.entries.size());
    for (const auto& e : idx.entries) {
        w.u128(e.kmer.bits);
        w.u64(e.location);
    }
    return w.take();
}

inline SpeciesIndex deserialize_species_index(std::string_view data, const std::string& what = "SIDX") {
    ByteReader r(data);
    if (r.raw(4) != std::string_view{detail::kSidxMagic, 4}) throw ParseError("not an MSIX file: " + what);
    if (r.u16() != detail::kSidxVersion) throw ParseError("unsupported MSIX version: " + what);
    SpeciesIndex idx;
    idx.k = r.u8();
    r.u8();
    idx.tax = TaxId{r.u32()};
    idx.genome_length = r.u64();
    std::uint64_t count = r.u64();
    idx.entries.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        PackedKmer km{r.u128(), static_cast<std::uint8_t>(idx.k)};
        idx.entries.push_back({km, r.u64()});
    }
    return idx;
}

inline void save_species_index(const SpeciesIndex& idx, const std::filesystem::path& path) {
    write_file(path, serialize_species_index(idx));
}

inline SpeciesIndex load_species_index(const std::filesystem::path& path) {
    return deserialize_species_index(read_file(path), path.string());
}

} // namespace metastore
