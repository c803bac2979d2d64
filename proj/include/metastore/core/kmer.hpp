#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include "metastore/core/errors.hpp"

namespace metastore {

using Uint128 = unsigned __int128;

/// Largest supported k-mer length. 60 bases fill 120 bits of the 128-bit
/// word; the 8 low bits are always zero.
inline constexpr int kMaxK = 60;

/// Bytes of one serialized k-mer.
inline constexpr std::size_t kKmerBytes = 16;

namespace detail {

// 2-bit base codes; -1 marks anything that is not an unambiguous base.
// Lowercase is accepted on input paths (soft-masked references).
inline constexpr std::array<signed char, 256> make_base_codes() {
    std::array<signed char, 256> t{};
    for (auto& v : t) v = -1;
    t['A'] = t['a'] = 0;
    t['C'] = t['c'] = 1;
    t['G'] = t['g'] = 2;
    t['T'] = t['t'] = 3;
    return t;
}

inline constexpr std::array<signed char, 256> kBaseCodes = make_base_codes();

inline constexpr char kBaseChars[4] = {'A', 'C', 'G', 'T'};

} // namespace detail

/// Taxonomic identifier. Value 0 is reserved for "unclassified" and never
/// labels a real taxon.
struct TaxId {
    std::uint32_t value = 0;

    constexpr TaxId() = default;
    constexpr explicit TaxId(std::uint32_t v) : value(v) {}

    auto operator<=>(const TaxId&) const = default;
};

inline constexpr TaxId kUnclassified{0};

inline std::ostream& operator<<(std::ostream& os, TaxId t) { return os << t.value; }

/// Fixed-width 2-bit packed k-mer, k in [1, 60].
///
/// Base 0 occupies the MOST significant bit pair, so for equal k the
/// unsigned order of `bits` is exactly the lexicographic order of the base
/// strings, and sorting packed words sorts k-mers. Unused low bits are zero.
/// Comparison is (bits, k), which extends the order lexicographically
/// across lengths ("AATC" < "AATCA" < "AATCC").
struct PackedKmer {
    Uint128 bits = 0;
    std::uint8_t k = 0;

    auto operator<=>(const PackedKmer& o) const {
        if (bits != o.bits) return bits < o.bits ? std::strong_ordering::less : std::strong_ordering::greater;
        return k <=> o.k;
    }
    bool operator==(const PackedKmer&) const = default;

    /// Code (0..3) of base `i`, counted from the left.
    int base_at(int i) const { return static_cast<int>((bits >> (126 - 2 * i)) & 3); }

    std::string unpack() const {
        std::string s(k, 'A');
        for (int i = 0; i < k; ++i) s[static_cast<std::size_t>(i)] = detail::kBaseChars[base_at(i)];
        return s;
    }

    /// First `k2` bases as a k-mer of length k2 (left-aligned layout keeps
    /// the shared bits in place; the tail is masked to zero).
    PackedKmer prefix(int k2) const {
        if (k2 < 1 || k2 > k)
            throw RangeError("prefix length " + std::to_string(k2) + " out of range for k=" + std::to_string(k));
        Uint128 mask = ~Uint128{0} << (128 - 2 * k2);
        return PackedKmer{bits & mask, static_cast<std::uint8_t>(k2)};
    }
};

/// Packs a base string of length k. Throws RangeError for bad k or length
/// mismatch and EncodingError for characters outside ACGT.
inline PackedKmer pack(std::string_view seq, int k) {
    if (k < 1 || k > kMaxK) throw RangeError("k=" + std::to_string(k) + " not in [1, 60]");
    if (static_cast<int>(seq.size()) != k)
        throw RangeError("sequence length " + std::to_string(seq.size()) + " != k=" + std::to_string(k));
    Uint128 bits = 0;
    for (int i = 0; i < k; ++i) {
        signed char code = detail::kBaseCodes[static_cast<unsigned char>(seq[static_cast<std::size_t>(i)])];
        if (code < 0)
            throw EncodingError(std::string("non-ACGT character '") + seq[static_cast<std::size_t>(i)] +
                                "' at position " + std::to_string(i));
        bits |= Uint128{static_cast<unsigned>(code)} << (126 - 2 * i);
    }
    return PackedKmer{bits, static_cast<std::uint8_t>(k)};
}

inline PackedKmer pack(std::string_view seq) { return pack(seq, static_cast<int>(seq.size())); }

/// Smallest k-mer of length k (all A).
inline PackedKmer min_kmer(int k) {
    if (k < 1 || k > kMaxK) throw RangeError("k=" + std::to_string(k) + " not in [1, 60]");
    return PackedKmer{0, static_cast<std::uint8_t>(k)};
}

inline std::ostream& operator<<(std::ostream& os, const PackedKmer& km) { return os << km.unpack(); }

/// Calls `fn(PackedKmer)` for every length-k window of `seq` that contains
/// only unambiguous bases; windows touching any other character are skipped
/// entirely. Windows are visited left to right; `fn` may also accept the
/// window start offset as a second argument.
template <typename Fn>
void for_each_valid_kmer(std::string_view seq, int k, Fn&& fn) {
    if (k < 1 || k > kMaxK) throw RangeError("k=" + std::to_string(k) + " not in [1, 60]");
    const std::size_t n = seq.size();
    if (n < static_cast<std::size_t>(k)) return;
    Uint128 window = 0;
    const Uint128 keep = (Uint128{1} << (2 * k)) - 1;
    int valid = 0; // bases accumulated since the last ambiguous character
    for (std::size_t i = 0; i < n; ++i) {
        signed char code = detail::kBaseCodes[static_cast<unsigned char>(seq[i])];
        if (code < 0) {
            valid = 0;
            window = 0;
            continue;
        }
        window = ((window << 2) | static_cast<unsigned>(code)) & keep;
        if (++valid >= k) {
            PackedKmer km{window << (128 - 2 * k), static_cast<std::uint8_t>(k)};
            if constexpr (std::is_invocable_v<Fn, PackedKmer, std::size_t>)
                fn(km, i + 1 - static_cast<std::size_t>(k));
            else
                fn(km);
        }
    }
}

} // namespace metastore
