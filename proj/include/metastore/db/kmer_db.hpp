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

/// Sorted unique k_max-mer reference database (the step-2 stream source).
struct KmerDatabase {
    int k = 0;
    std::vector<PackedKmer> entries; // strictly increasing

    std::uint64_t count() const { return entries.size(); }
    std::uint64_t bytes() const { return entries.size() * kKmerBytes; }
};

/// Distinct k_max-mers across all reference sequences, sorted.
inline KmerDatabase build_kmer_db(std::span<const std::string> references, int k_max) {
    if (references.empty()) throw BuildError("no reference sequences given");
    KmerDatabase db;
    db.k = k_max;
    for (const std::string& seq : references)
        for_each_valid_kmer(seq, k_max, [&](PackedKmer km) { db.entries.push_back(km); });
    std::sort(db.entries.begin(), db.entries.end());
    db.entries.erase(std::unique(db.entries.begin(), db.entries.end()), db.entries.end());
    return db;
}

namespace detail {
inline constexpr char kKdbMagic[4] = {'M', 'S', 'K', 'D'};
inline constexpr std::uint16_t kKdbVersion = 1;
} // namespace detail

inline std::string serialize_kmer_db(const KmerDatabase& db) {
    ByteWriter w;
    w.raw({detail::kKdbMagic, 4});
    w.u16(detail::kKdbVersion);
    w.u8(static_cast<std::uint8_t>(db.k));
    w.u8(0);
    w.u64(db.entries.size());
    for (const PackedKmer& km : db.entries) w.u128(km.bits);
    return w.take();
}

inline KmerDatabase deserialize_kmer_db(std::string_view data, const std::string& what = "KDB") {
    ByteReader r(data);
    if (r.raw(4) != std::string_view{detail::kKdbMagic, 4}) throw ParseError("not an MSKD file: " + what);
    if (r.u16() != detail::kKdbVersion) throw ParseError("unsupported MSKD version: " + what);
    KmerDatabase db;
    db.k = r.u8();
    r.u8();
    std::uint64_t count = r.u64();
    db.entries.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i)
        db.entries.push_back(PackedKmer{r.u128(), static_cast<std::uint8_t>(db.k)});
    return db;
}

inline void save_kmer_db(const KmerDatabase& db, const std::filesystem::path& path) {
    write_file(path, serialize_kmer_db(db));
}

inline KmerDatabase load_kmer_db(const std::filesystem::path& path) {
    return deserialize_kmer_db(read_file(path), path.string());
}

} // namespace metastore
