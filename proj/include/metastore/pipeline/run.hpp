#pragma once

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "metastore/core/errors.hpp"
#include "metastore/core/kmer.hpp"
#include "metastore/db/kmer_db.hpp"
#include "metastore/db/kss.hpp"
#include "metastore/db/species_index.hpp"
#include "metastore/isp/intersect.hpp"
#include "metastore/isp/merge.hpp"
#include "metastore/isp/retrieve.hpp"
#include "metastore/prep/bucket.hpp"
#include "metastore/prep/fastx.hpp"
#include "metastore/sim/config.hpp"
#include "metastore/sim/simulate.hpp"

namespace metastore {

/// Everything one end-to-end run needs.
struct RunPlan {
    std::vector<std::filesystem::path> samples;
    std::filesystem::path db_path;
    std::filesystem::path kss_path;
    std::vector<std::filesystem::path> index_paths;

    int k = 60;
    int bucket_target = 512;
    FilterPolicy filter_policy{2, std::nullopt};
    double theta = 0.25;
    SimMode mode = SimMode::Ms;
    SsdConfig ssd;
    std::optional<PowerModel> power;
    std::uint64_t host_dram_budget = 8ull << 30;
    int samples_buffered = 1;
    bool per_query_hits = false;
};

/// Functional and simulated outputs of one sample.
struct SampleResult {
    std::set<TaxId> presence;
    HitTable hits;
    StagePlan stage_plan;
    std::vector<PackedKmer> intersection; // sorted unique, KDB record layout on disk
    std::uint64_t total_kmers = 0;
    std::uint64_t filtered_kmers = 0;
    std::uint64_t intersecting_kmers = 0;
};

struct ClassifyResult {
    std::vector<SampleResult> samples;
    Timeline timeline;
    std::vector<std::vector<std::size_t>> groups; // sample indices per db pass
};

struct AbundanceReport {
    std::map<TaxId, std::uint64_t> read_counts; // present taxa only
    std::map<TaxId, double> fractions;          // over classified reads
    std::uint64_t unclassified = 0;
    std::uint64_t total_reads = 0;
};

namespace detail {

/// First kPlanSampleSize k-mers of a FASTQ file, for preliminary planning.
inline std::vector<PackedKmer> planning_sample(const std::filesystem::path& path, int k) {
    std::vector<PackedKmer> sample;
    FastqReader reader(path);
    FastqRecord rec;
    while (sample.size() < kPlanSampleSize && reader.next(rec)) {
        for_each_valid_kmer(rec.seq, k, [&](PackedKmer km) {
            if (sample.size() < kPlanSampleSize) sample.push_back(km);
        });
    }
    return sample;
}

inline BucketPlan plan_for_sample(const std::filesystem::path& path, int k, int target) {
    std::vector<PackedKmer> sample = planning_sample(path, k);
    if (sample.empty()) {
        // Empty or all-ambiguous sample: one bucket spanning the key space.
        BucketPlan plan;
        plan.boundaries = {min_kmer(k)};
        plan.target_count = target;
        plan.pinned = {Pin::Dram};
        return plan;
    }
    return plan_buckets(sample, target);
}

/// Step 1 + step 2 (functional) for one sample under a given bucket plan.
inline SampleResult classify_sample(const RunPlan& plan, const std::filesystem::path& sample_path,
                                    BucketPlan bucket_plan, const KmerDatabase& db, const KssSketch& kss,
                                    std::uint64_t kss_bytes) {
    SampleResult out;

    FastqReader reader(sample_path);
    FastqRecord rec;
    auto source = [&](std::string& seq) {
        if (!reader.next(rec)) return false;
        seq = rec.seq;
        return true;
    };
    ExtractResult extracted = extract(source, plan.k, bucket_plan, plan.host_dram_budget);
    out.total_kmers = extracted.total_kmers;

    StagePlan& sp = out.stage_plan;
    sp.db_bytes = db.bytes();
    sp.kss_bytes = kss_bytes;

    // Buckets in range order keep the global query stream strictly
    // increasing, so per-bucket intersections concatenate directly.
    std::vector<PackedKmer> intersection;
    for (std::size_t i = 0; i < extracted.buckets.size(); ++i) {
        Bucket& bucket = extracted.buckets[i];
        sp.bucket_raw_bytes.push_back(bucket.bytes());
        sp.spill_bytes += bucket.spilled_bytes;

        auto counts = sort_and_count(bucket);
        auto query = filter(counts, plan.filter_policy);
        out.filtered_kmers += query.size();
        sp.bucket_query_bytes.push_back(query.size() * kKmerBytes);

        auto lo = std::lower_bound(db.entries.begin(), db.entries.end(), bucket.lo);
        auto hi = bucket.hi ? std::lower_bound(db.entries.begin(), db.entries.end(), *bucket.hi)
                            : db.entries.end();
        sp.bucket_db_bytes.push_back(static_cast<std::uint64_t>(hi - lo) * kKmerBytes);

        std::span<const PackedKmer> db_range{db.entries.data() + (lo - db.entries.begin()),
                                             static_cast<std::size_t>(hi - lo)};
        auto part = stream_intersect(query, db_range);
        intersection.insert(intersection.end(), part.begin(), part.end());
    }
    out.intersecting_kmers = intersection.size();
    sp.intersection_bytes = intersection.size() * kKmerBytes;

    out.hits = retrieve_taxids(intersection, kss, {.per_query = plan.per_query_hits});
    out.presence = decide_presence(out.hits, kss, plan.theta);
    out.intersection = std::move(intersection);
    return out;
}

inline void shift_events(Timeline& tl, const Timeline& group, double offset) {
    for (TimelineEvent e : group.events) {
        e.start += offset;
        e.end += offset;
        tl.events.push_back(std::move(e));
    }
    for (const auto& [stage, t] : group.stage_totals) tl.stage_totals[stage] += t;
    tl.total = std::max(tl.total, offset + group.total);
    tl.taxid_phases = std::max(tl.taxid_phases, group.taxid_phases);
}

} // namespace detail

/// Classifies every sample in the plan. With samples_buffered = M > 1,
/// samples are grouped greedily in arrival order so each group's extracted
/// k-mers fit the host DRAM budget, and each group shares one database
/// stream (one set of bucket ranges, db bytes charged once per group);
/// groups that cannot be combined fall back to separate passes with a
/// warning. Functional outputs are always identical to independent runs.
inline ClassifyResult run_classify(const RunPlan& plan) {
    if (plan.samples.empty()) throw ConfigError("no samples given");
    plan.filter_policy.validate();
    plan.ssd.validate();
    if (plan.theta < 0 || plan.theta > 1) throw ConfigError("theta must be in [0, 1]");

    KmerDatabase db = load_kmer_db(plan.db_path);
    if (db.k != plan.k)
        throw ConfigError("database k=" + std::to_string(db.k) + " does not match requested k=" +
                          std::to_string(plan.k));
    std::string kss_bytes_str = read_file(plan.kss_path);
    KssSketch kss = deserialize_kss(kss_bytes_str, plan.kss_path.string());
    if (kss.k_max() != plan.k)
        throw ConfigError("KSS k_max=" + std::to_string(kss.k_max()) + " does not match requested k=" +
                          std::to_string(plan.k));
    const std::uint64_t kss_bytes = kss_bytes_str.size();

    ClassifyResult result;
    result.samples.resize(plan.samples.size());

    // Group samples for buffered multi-sample analysis.
    std::vector<std::vector<std::size_t>> groups;
    const std::size_t buffered = std::max(1, plan.samples_buffered);
    for (std::size_t i = 0; i < plan.samples.size(); ++i) {
        if (groups.empty() || groups.back().size() >= buffered)
            groups.emplace_back();
        groups.back().push_back(i);
    }

    double offset = 0;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        std::vector<std::size_t> group = groups[gi];
        // One shared bucket plan per group so every sample's buckets align
        // with the same database ranges.
        BucketPlan shared = detail::plan_for_sample(plan.samples[group.front()], plan.k, plan.bucket_target);

        std::vector<std::size_t> kept;
        std::uint64_t group_kmer_bytes = 0;
        for (std::size_t pos = 0; pos < group.size(); ++pos) {
            std::size_t idx = group[pos];
            BucketPlan per_sample = shared;
            SampleResult sr =
                detail::classify_sample(plan, plan.samples[idx], per_sample, db, kss, kss_bytes);
            std::uint64_t sample_bytes = sr.total_kmers * kKmerBytes;
            if (!kept.empty() && group_kmer_bytes + sample_bytes > plan.host_dram_budget) {
                // Does not fit this pass; push the remainder into a new group.
                std::cerr << "warning: host DRAM budget exceeded, splitting multi-sample group before sample "
                          << plan.samples[idx] << "\n";
                groups.insert(groups.begin() + static_cast<std::ptrdiff_t>(gi) + 1,
                              std::vector<std::size_t>(group.begin() + static_cast<std::ptrdiff_t>(pos),
                                                       group.end()));
                break;
            }
            group_kmer_bytes += sample_bytes;
            result.samples[idx] = std::move(sr);
            kept.push_back(idx);
        }
        groups[gi] = kept;

        // Combined stage plan: per-bucket volumes summed over the group's
        // samples, database ranges charged once.
        StagePlan combined;
        const StagePlan& first = result.samples[kept.front()].stage_plan;
        combined.db_bytes = first.db_bytes;
        combined.bucket_db_bytes = first.bucket_db_bytes;
        combined.kss_bytes = first.kss_bytes;
        combined.bucket_raw_bytes.assign(first.bucket_raw_bytes.size(), 0);
        combined.bucket_query_bytes.assign(first.bucket_query_bytes.size(), 0);
        for (std::size_t idx : kept) {
            const StagePlan& sp = result.samples[idx].stage_plan;
            combined.intersection_bytes += sp.intersection_bytes;
            combined.spill_bytes += sp.spill_bytes;
            for (std::size_t b = 0; b < sp.bucket_raw_bytes.size(); ++b) {
                combined.bucket_raw_bytes[b] += sp.bucket_raw_bytes[b];
                combined.bucket_query_bytes[b] += sp.bucket_query_bytes[b];
            }
        }
        Timeline group_tl = simulate(combined, plan.ssd, plan.mode);
        detail::shift_events(result.timeline, group_tl, offset);
        offset = result.timeline.total;
        result.groups.push_back(kept);
    }

    if (plan.power) result.timeline.energy_joules = energy(result.timeline, resolve_power(*plan.power, plan.ssd));
    return result;
}

/// Majority-vote read classification against the unified index of the
/// present taxa; abundance is each taxon's share of classified reads.
/// When `out_unified` is given it receives the merged index (the mapper
/// hand-off product).
inline AbundanceReport run_abundance(const RunPlan& plan, const std::set<TaxId>& presence,
                                     UnifiedIndex* out_unified = nullptr) {
    if (presence.empty()) throw DataError("abundance estimation needs a non-empty presence set");

    std::map<TaxId, SpeciesIndex> available;
    for (const auto& path : plan.index_paths) {
        SpeciesIndex idx = load_species_index(path);
        available[idx.tax] = std::move(idx);
    }
    std::vector<SpeciesIndex> chosen;
    for (TaxId tax : presence) {
        auto it = available.find(tax);
        if (it == available.end())
            throw DataError("no species index for present taxon " + std::to_string(tax.value));
        if (it->second.k > plan.k)
            throw ConfigError("species index k=" + std::to_string(it->second.k) + " larger than read k=" +
                              std::to_string(plan.k));
        chosen.push_back(std::move(it->second));
    }
    const int index_k = chosen.front().k;
    UnifiedIndex unified = merge_indexes(chosen);

    AbundanceReport report;
    for (const auto& sample : plan.samples) {
        FastqReader reader(sample);
        FastqRecord rec;
        while (reader.next(rec)) {
            report.total_reads += 1;
            std::map<TaxId, std::uint64_t> votes;
            for_each_valid_kmer(rec.seq, index_k, [&](PackedKmer km) {
                for (std::uint64_t loc : unified.lookup(km)) votes[unified.taxon_of(loc)] += 1;
            });
            TaxId best = kUnclassified;
            std::uint64_t best_votes = 0;
            for (const auto& [tax, n] : votes) {
                if (n > best_votes) { // ties keep the lowest tax ID
                    best = tax;
                    best_votes = n;
                }
            }
            if (best == kUnclassified)
                report.unclassified += 1;
            else
                report.read_counts[best] += 1;
        }
    }
    for (TaxId tax : presence) report.read_counts.try_emplace(tax, 0);
    std::uint64_t classified = report.total_reads - report.unclassified;
    for (const auto& [tax, n] : report.read_counts)
        report.fractions[tax] = classified == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(classified);
    if (out_unified) *out_unified = std::move(unified);
    return report;
}

} // namespace metastore
