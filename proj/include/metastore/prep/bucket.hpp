#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "metastore/core/bytes.hpp"
#include "metastore/core/errors.hpp"
#include "metastore/core/kmer.hpp"

namespace metastore {

enum class Pin : std::uint8_t { Dram, Ssd };

/// Lexicographic partition of the query k-mer space.
///
/// boundaries[i] is the inclusive lower bound of bucket i; bucket i covers
/// [boundaries[i], boundaries[i+1]) and the last bucket is unbounded above.
/// boundaries[0] is always the minimum k-mer, so the buckets cover the
/// whole key space.
struct BucketPlan {
    std::vector<PackedKmer> boundaries;
    int target_count = 512;
    std::vector<Pin> pinned; // per bucket; extraction flips entries to Ssd

    std::size_t bucket_count() const { return boundaries.size(); }

    std::size_t bucket_of(const PackedKmer& km) const {
        auto it = std::upper_bound(boundaries.begin(), boundaries.end(), km,
                                   [](const PackedKmer& a, const PackedKmer& b) { return a.bits < b.bits; });
        return static_cast<std::size_t>(it - boundaries.begin()) - 1;
    }

    /// Exclusive upper bound of bucket i, or nullopt for the last bucket.
    std::optional<PackedKmer> upper_bound_of(std::size_t i) const {
        if (i + 1 < boundaries.size()) return boundaries[i + 1];
        return std::nullopt;
    }
};

/// One lexicographic range of extracted query k-mers.
struct Bucket {
    PackedKmer lo;                     // inclusive
    std::optional<PackedKmer> hi;      // exclusive; nullopt = end of key space
    std::vector<PackedKmer> kmers;
    Pin location = Pin::Dram;
    std::uint64_t spill_buffer_bytes = 0;
    std::uint64_t spill_writes = 0;    // sequential append operations issued
    std::uint64_t spilled_bytes = 0;   // bytes flushed so far
    std::uint64_t pending_bytes = 0;   // bytes sitting in the append buffer

    std::uint64_t bytes() const { return kmers.size() * kKmerBytes; }

    bool contains(const PackedKmer& km) const {
        if (km.bits < lo.bits) return false;
        return !hi || km.bits < hi->bits;
    }
};

/// Frequency filter applied after sorting. max_count empty = unlimited.
struct FilterPolicy {
    std::uint64_t min_count = 2;
    std::optional<std::uint64_t> max_count;

    void validate() const {
        if (max_count && min_count > *max_count)
            throw ConfigError("filter min_count > max_count");
    }
};

/// Number of k-mers sampled for preliminary bucket planning.
inline constexpr std::size_t kPlanSampleSize = 100000;

/// Default spill-append buffer per SSD-pinned bucket (8 MiB).
inline constexpr std::uint64_t kDefaultSpillBufferBytes = 8ull << 20;

/// Chooses bucket boundaries from sample quantiles so the expected load per
/// bucket is balanced, then merges adjacent underfull preliminary buckets
/// until at most `target_count` remain (merge target: max/mean load <= 2).
inline BucketPlan plan_buckets(std::span<const PackedKmer> sample, int target_count) {
    if (sample.empty()) throw PlanError("cannot plan buckets from an empty sample");
    if (target_count < 1) throw PlanError("bucket target must be >= 1");

    std::vector<PackedKmer> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    // Preliminary buckets at 4x the target resolution; duplicates collapse.
    const std::size_t prelim = std::min<std::size_t>(static_cast<std::size_t>(target_count) * 4, n);
    std::vector<PackedKmer> prelim_bounds;
    prelim_bounds.reserve(prelim);
    for (std::size_t i = 0; i < prelim; ++i) {
        PackedKmer q = sorted[i * n / prelim];
        if (prelim_bounds.empty() || prelim_bounds.back().bits < q.bits) prelim_bounds.push_back(q);
    }

    // Sample load per preliminary bucket.
    std::vector<std::uint64_t> loads(prelim_bounds.size(), 0);
    {
        std::size_t b = 0;
        for (const PackedKmer& km : sorted) {
            while (b + 1 < prelim_bounds.size() && !(km.bits < prelim_bounds[b + 1].bits)) ++b;
            ++loads[b];
        }
    }

    // Greedy merge of adjacent buckets up to a per-bucket load cap; the cap
    // doubles until the bucket count fits the target.
    std::vector<PackedKmer> bounds;
    std::uint64_t cap = (n + static_cast<std::size_t>(target_count) - 1) / static_cast<std::size_t>(target_count);
    for (;;) {
        bounds.clear();
        std::uint64_t acc = 0;
        for (std::size_t i = 0; i < prelim_bounds.size(); ++i) {
            if (bounds.empty() || (acc > 0 && acc + loads[i] > cap)) {
                bounds.push_back(prelim_bounds[i]);
                acc = 0;
            }
            acc += loads[i];
        }
        if (bounds.size() <= static_cast<std::size_t>(target_count)) break;
        cap *= 2;
    }

    // Bucket 0 must cover from the bottom of the key space.
    bounds.front() = min_kmer(sorted.front().k);

    BucketPlan plan;
    plan.boundaries = std::move(bounds);
    plan.target_count = target_count;
    plan.pinned.assign(plan.boundaries.size(), Pin::Dram);
    return plan;
}

struct ExtractOptions {
    std::uint64_t spill_buffer_bytes = kDefaultSpillBufferBytes;
    /// When set, SSD-pinned buckets are also written as MSBK spill files
    /// named bucket<i>.msbk under this directory.
    std::optional<std::filesystem::path> spill_dir;
};

struct ExtractResult {
    std::vector<Bucket> buckets;
    std::uint64_t total_kmers = 0;
    std::uint64_t dram_bytes = 0; // k-mer bytes currently held by DRAM buckets
};

namespace detail {

inline constexpr char kBucketMagic[4] = {'M', 'S', 'B', 'K'};
inline constexpr std::uint16_t kBucketVersion = 1;
inline constexpr std::uint8_t kBucketFlagSortedUnique = 0x01;

class SpillFile {
public:
    SpillFile() = default;
    void open(const std::filesystem::path& path, int k) {
        os_.open(path, std::ios::binary | std::ios::trunc);
        if (!os_) throw IoError("cannot open spill file: " + path.string());
        path_ = path;
        ByteWriter header;
        header.raw({kBucketMagic, 4});
        header.u16(kBucketVersion);
        header.u8(static_cast<std::uint8_t>(k));
        header.u8(0); // flags: unsorted spill
        header.u64(0); // count, patched in finish()
        os_.write(header.str().data(), static_cast<std::streamsize>(header.size()));
    }
    bool is_open() const { return os_.is_open(); }
    void append(std::string_view bytes) {
        os_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!os_) throw IoError("spill write failed: " + path_.string());
    }
    void finish(std::uint64_t count) {
        if (!os_.is_open()) return;
        os_.seekp(8);
        ByteWriter w;
        w.u64(count);
        os_.write(w.str().data(), 8);
        os_.close();
    }

private:
    std::ofstream os_;
    std::filesystem::path path_;
};

} // namespace detail

/// Extracts every valid length-k window from a read source into the plan's
/// buckets. `next_read` is any callable `bool(std::string&)` yielding one
/// read sequence at a time.
///
/// DRAM accounting: when the k-mer bytes held by DRAM buckets would exceed
/// `host_dram_budget`, the largest DRAM bucket is pinned to SSD and all of
/// its k-mers (current and future) are charged through a sequential append
/// buffer of `spill_buffer_bytes`, so the number of spill writes per bucket
/// is at most ceil(bucket_bytes / spill_buffer_bytes).
template <typename NextRead>
    requires std::is_invocable_r_v<bool, NextRead&, std::string&>
ExtractResult extract(NextRead&& next_read, int k, BucketPlan& plan, std::uint64_t host_dram_budget,
                      const ExtractOptions& opts = {}) {
    if (k < 1 || k > kMaxK) throw RangeError("k=" + std::to_string(k) + " not in [1, 60]");
    if (host_dram_budget == 0) throw ConfigError("host DRAM budget must be > 0");

    ExtractResult res;
    res.buckets.resize(plan.bucket_count());
    std::vector<detail::SpillFile> spill_files(plan.bucket_count());
    std::vector<ByteWriter> spill_buffers(plan.bucket_count());
    for (std::size_t i = 0; i < plan.bucket_count(); ++i) {
        Bucket& b = res.buckets[i];
        b.lo = plan.boundaries[i];
        b.hi = plan.upper_bound_of(i);
        b.spill_buffer_bytes = opts.spill_buffer_bytes;
        b.location = plan.pinned[i];
    }

    auto flush = [&](std::size_t i) {
        Bucket& b = res.buckets[i];
        if (b.pending_bytes == 0) return;
        if (spill_files[i].is_open()) {
            spill_files[i].append(spill_buffers[i].str());
            spill_buffers[i] = ByteWriter{};
        }
        b.spill_writes += 1;
        b.spilled_bytes += b.pending_bytes;
        b.pending_bytes = 0;
    };

    auto charge_ssd = [&](std::size_t i, const PackedKmer& km) {
        Bucket& b = res.buckets[i];
        if (spill_files[i].is_open()) spill_buffers[i].u128(km.bits);
        b.pending_bytes += kKmerBytes;
        if (b.pending_bytes >= b.spill_buffer_bytes) flush(i);
    };

    auto pin_to_ssd = [&](std::size_t i) {
        Bucket& b = res.buckets[i];
        b.location = Pin::Ssd;
        plan.pinned[i] = Pin::Ssd;
        res.dram_bytes -= b.bytes();
        if (opts.spill_dir) {
            std::filesystem::create_directories(*opts.spill_dir);
            spill_files[i].open(*opts.spill_dir / ("bucket" + std::to_string(i) + ".msbk"), k);
        }
        for (const PackedKmer& km : b.kmers) charge_ssd(i, km);
    };

    std::string read;
    while (next_read(read)) {
        for_each_valid_kmer(read, k, [&](PackedKmer km) {
            std::size_t i = plan.bucket_of(km);
            Bucket& b = res.buckets[i];
            b.kmers.push_back(km);
            res.total_kmers += 1;
            if (b.location == Pin::Dram) {
                res.dram_bytes += kKmerBytes;
                while (res.dram_bytes > host_dram_budget) {
                    // Evict the largest DRAM bucket; ties go to the lowest index.
                    std::size_t victim = res.buckets.size();
                    std::uint64_t best = 0;
                    for (std::size_t j = 0; j < res.buckets.size(); ++j) {
                        if (res.buckets[j].location == Pin::Dram && res.buckets[j].bytes() > best) {
                            best = res.buckets[j].bytes();
                            victim = j;
                        }
                    }
                    if (victim == res.buckets.size()) break;
                    pin_to_ssd(victim);
                }
            } else {
                charge_ssd(i, km);
            }
        });
    }

    for (std::size_t i = 0; i < res.buckets.size(); ++i) {
        flush(i);
        spill_files[i].finish(res.buckets[i].kmers.size());
    }
    return res;
}

inline ExtractResult extract(std::span<const std::string> reads, int k, BucketPlan& plan,
                             std::uint64_t host_dram_budget, const ExtractOptions& opts = {}) {
    std::size_t next = 0;
    auto source = [&](std::string& out) {
        if (next == reads.size()) return false;
        out = reads[next++];
        return true;
    };
    return extract(source, k, plan, host_dram_budget, opts);
}

using KmerCount = std::pair<PackedKmer, std::uint64_t>;

/// Sorts the bucket's k-mers in place and returns (k-mer, multiplicity)
/// runs in strictly increasing order.
inline std::vector<KmerCount> sort_and_count(Bucket& bucket) {
    std::sort(bucket.kmers.begin(), bucket.kmers.end());
    std::vector<KmerCount> out;
    for (std::size_t i = 0; i < bucket.kmers.size();) {
        std::size_t j = i;
        while (j < bucket.kmers.size() && bucket.kmers[j] == bucket.kmers[i]) ++j;
        out.emplace_back(bucket.kmers[i], j - i);
        i = j;
    }
    return out;
}

/// Keeps k-mers with min_count <= count <= max_count; input must be the
/// sorted unique output of sort_and_count.
inline std::vector<PackedKmer> filter(std::span<const KmerCount> sorted_counts, const FilterPolicy& policy) {
    policy.validate();
    std::vector<PackedKmer> out;
    for (const auto& [km, count] : sorted_counts) {
        if (count < policy.min_count) continue;
        if (policy.max_count && count > *policy.max_count) continue;
        out.push_back(km);
    }
    return out;
}

/// Writes a bucket k-mer stream in the MSBK layout:
/// magic "MSBK", u16 version, u8 k, u8 flags (bit 0 = sorted-unique),
/// u64 count, then raw 16-byte k-mers.
inline void write_bucket_file(const std::filesystem::path& path, int k, std::span<const PackedKmer> kmers,
                              bool sorted_unique) {
    ByteWriter w;
    w.raw({detail::kBucketMagic, 4});
    w.u16(detail::kBucketVersion);
    w.u8(static_cast<std::uint8_t>(k));
    w.u8(sorted_unique ? detail::kBucketFlagSortedUnique : 0);
    w.u64(kmers.size());
    for (const PackedKmer& km : kmers) w.u128(km.bits);
    write_file(path, w.str());
}

struct BucketFile {
    int k = 0;
    bool sorted_unique = false;
    std::vector<PackedKmer> kmers;
};

inline BucketFile read_bucket_file(const std::filesystem::path& path) {
    std::string data = read_file(path);
    ByteReader r(data);
    if (r.raw(4) != std::string_view{detail::kBucketMagic, 4}) throw ParseError("not an MSBK file: " + path.string());
    if (r.u16() != detail::kBucketVersion) throw ParseError("unsupported MSBK version: " + path.string());
    BucketFile bf;
    bf.k = r.u8();
    bf.sorted_unique = (r.u8() & detail::kBucketFlagSortedUnique) != 0;
    std::uint64_t count = r.u64();
    bf.kmers.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i)
        bf.kmers.push_back(PackedKmer{r.u128(), static_cast<std::uint8_t>(bf.k)});
    return bf;
}

} // namespace metastore
