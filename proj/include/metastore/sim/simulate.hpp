#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "metastore/core/errors.hpp"
#include "metastore/core/kmer.hpp"
#include "metastore/sim/config.hpp"
#include "metastore/sim/ftl.hpp"

namespace metastore {

enum class SimMode { Ms, MsNol, ExtMs, MsCc };

inline SimMode parse_sim_mode(const std::string& s) {
    if (s == "ms") return SimMode::Ms;
    if (s == "ms-nol") return SimMode::MsNol;
    if (s == "ext-ms") return SimMode::ExtMs;
    if (s == "ms-cc") return SimMode::MsCc;
    throw ConfigError("unknown mode '" + s + "' (expected ms|ms-nol|ext-ms|ms-cc)");
}

inline std::string to_string(SimMode m) {
    switch (m) {
        case SimMode::Ms: return "ms";
        case SimMode::MsNol: return "ms-nol";
        case SimMode::ExtMs: return "ext-ms";
        case SimMode::MsCc: return "ms-cc";
    }
    return "?";
}

/// Per-stage byte volumes of one analysis run, bucket by bucket.
struct StagePlan {
    std::uint64_t db_bytes = 0;                      // sorted k_max database
    std::vector<std::uint64_t> bucket_raw_bytes;     // extracted k-mers sorted on the host
    std::vector<std::uint64_t> bucket_query_bytes;   // filtered k-mers sent to the SSD
    std::vector<std::uint64_t> bucket_db_bytes;      // db range per bucket; empty = even split
    std::uint64_t spill_bytes = 0;                   // step-1 SSD-pinned bucket writes
    std::uint64_t intersection_bytes = 0;
    std::uint64_t kss_bytes = 0;

    void validate() const {
        if (bucket_raw_bytes.empty() || bucket_raw_bytes.size() != bucket_query_bytes.size())
            throw ConfigError("stage plan needs matching per-bucket byte lists");
        if (!bucket_db_bytes.empty()) {
            if (bucket_db_bytes.size() != bucket_raw_bytes.size())
                throw ConfigError("stage plan db split does not match bucket count");
            std::uint64_t sum = 0;
            for (std::uint64_t b : bucket_db_bytes) sum += b;
            if (sum != db_bytes) throw ConfigError("stage plan db split does not sum to db_bytes");
        }
    }
};

struct TimelineEvent {
    std::string stage;    // sort | transfer | intersect | taxid
    std::string resource; // host_cpu | ext_link | flash | accel | ctrl_cores | internal_dram | host_dram
    double start = 0;
    double end = 0;
    std::uint64_t bytes = 0;
};

struct Timeline {
    std::vector<TimelineEvent> events;
    std::map<std::string, double> stage_totals;
    double total = 0;
    double energy_joules = 0;
    int taxid_phases = 1;

    double stage_total(const std::string& stage) const {
        auto it = stage_totals.find(stage);
        return it == stage_totals.end() ? 0.0 : it->second;
    }
    double busy_seconds(const std::string& resource) const {
        double t = 0;
        for (const auto& e : events)
            if (e.resource == resource) t += e.end - e.start;
        return t;
    }
    std::uint64_t bytes_on(const std::string& resource, const std::string& stage) const {
        std::uint64_t n = 0;
        for (const auto& e : events)
            if (e.resource == resource && e.stage == stage) n += e.bytes;
        return n;
    }
};

namespace detail {

inline std::uint64_t page_quantized(std::uint64_t bytes, std::uint64_t page) {
    return ((bytes + page - 1) / page) * page;
}

} // namespace detail

/// Discrete-event schedule of one run.
///
/// MS pipelines sort(i+1) / transfer(i) / ISP(i-1) at bucket granularity;
/// MS-NOL serializes the three stages; Ext-MS streams the database over the
/// external link to the same accelerators outside the SSD and charges host
/// DRAM traffic; MS-CC replaces the per-channel comparators with the
/// controller cores. Flash reads run at min(internal bandwidth, consumer
/// rate), and internal DRAM traffic (query in, compare read, intersection
/// write, FTL metadata) throttles ISP when it exceeds the DRAM bandwidth.
inline Timeline simulate(const StagePlan& plan, const SsdConfig& config, SimMode mode) {
    config.validate();
    plan.validate();

    const std::size_t n_buckets = plan.bucket_raw_bytes.size();
    std::vector<std::uint64_t> db_split = plan.bucket_db_bytes;
    if (db_split.empty()) {
        db_split.assign(n_buckets, plan.db_bytes / n_buckets);
        db_split.back() += plan.db_bytes - (plan.db_bytes / n_buckets) * n_buckets;
    }
    std::uint64_t query_total = 0;
    for (std::uint64_t q : plan.bucket_query_bytes) query_total += q;

    // Internal DRAM budget: two query batches double-buffered plus the
    // compact FTL metadata; what remains holds the intersection. An
    // intersection larger than that triggers the two-phase fallback (the
    // tax-ID pass re-streams the KSS once per phase).
    const std::uint64_t batch = config.batch_bytes();
    const CompactMapping mapping = ftl_layout(plan.db_bytes, config);
    const std::uint64_t metadata = metadata_budget(mapping, config);
    const std::uint64_t reserved = 2 * batch + metadata;
    if (reserved > config.internal_dram_bytes)
        throw ConfigError("internal DRAM too small: needs " + std::to_string(reserved) + " bytes for buffers, has " +
                          std::to_string(config.internal_dram_bytes));
    const std::uint64_t intersection_room = config.internal_dram_bytes - reserved;
    int phases = 1;
    if (plan.intersection_bytes > intersection_room) {
        if (intersection_room == 0)
            throw ConfigError("internal DRAM has no room for the intersection");
        phases = static_cast<int>((plan.intersection_bytes + intersection_room - 1) / intersection_room);
    }

    const double consumer_bw = (mode == SimMode::MsCc ? config.controller_core_rate
                                                      : config.comparator_rate * config.channels) *
                               static_cast<double>(kKmerBytes);
    const double supply_bw = mode == SimMode::ExtMs ? config.external_bw : config.internal_bw();
    const double stream_bw = std::min(supply_bw, consumer_bw);

    std::vector<double> sort_d(n_buckets), xfer_d(n_buckets), isp_d(n_buckets);
    std::vector<std::uint64_t> db_quant(n_buckets), dram_bytes(n_buckets);
    for (std::size_t i = 0; i < n_buckets; ++i) {
        sort_d[i] = static_cast<double>(plan.bucket_raw_bytes[i]) / config.host_sort_rate;
        xfer_d[i] = mode == SimMode::ExtMs ? 0.0
                                           : static_cast<double>(plan.bucket_query_bytes[i]) / config.external_bw;
        // An empty bucket never pulls its database range: the comparator
        // only requests the next database k-mer while queries remain.
        db_quant[i] = plan.bucket_query_bytes[i] == 0 ? 0 : detail::page_quantized(db_split[i], config.page_bytes);
        double flash_t = static_cast<double>(db_quant[i]) / stream_bw;
        std::uint64_t inter_share =
            query_total == 0 ? 0 : plan.intersection_bytes * plan.bucket_query_bytes[i] / query_total;
        std::uint64_t meta_share = plan.db_bytes == 0 ? 0 : metadata * db_split[i] / plan.db_bytes;
        dram_bytes[i] = 2 * plan.bucket_query_bytes[i] + inter_share + meta_share;
        double dram_t = static_cast<double>(dram_bytes[i]) / config.internal_dram_bw;
        isp_d[i] = mode == SimMode::ExtMs ? flash_t : std::max(flash_t, dram_t);
    }

    // Tax-ID retrieval streams the KSS once per fallback phase; an empty
    // intersection skips the pass entirely.
    const std::uint64_t kss_quant = detail::page_quantized(plan.kss_bytes, config.page_bytes);
    double taxid_d = 0;
    if (plan.intersection_bytes > 0) {
        double kss_t = static_cast<double>(kss_quant) * phases / stream_bw;
        double dram_t = static_cast<double>(plan.intersection_bytes) / config.internal_dram_bw;
        taxid_d = mode == SimMode::ExtMs ? kss_t : std::max(kss_t, dram_t);
    }

    Timeline tl;
    tl.taxid_phases = phases;
    const std::string compute = mode == SimMode::MsCc ? "ctrl_cores" : "accel";
    const std::string dram_res = mode == SimMode::ExtMs ? "host_dram" : "internal_dram";

    auto emit = [&](const std::string& stage, const std::string& resource, double start, double dur,
                    std::uint64_t bytes) {
        if (dur <= 0 && bytes == 0) return;
        tl.events.push_back({stage, resource, start, start + dur, bytes});
    };

    // Step-1 spills of SSD-pinned buckets: buffered sequential writes over
    // the external link, before any bucket is sorted (no GC; flash writes
    // stop after step 1).
    double spill_d = static_cast<double>(plan.spill_bytes) / config.external_bw;
    if (spill_d > 0) emit("spill", "ext_link", 0, spill_d, plan.spill_bytes);
    tl.stage_totals["spill"] = spill_d;

    double sort_free = spill_d, link_free = spill_d, flash_free = spill_d;
    std::vector<double> sort_end(n_buckets), xfer_end(n_buckets), isp_end(n_buckets);

    const bool overlap = mode != SimMode::MsNol;
    if (overlap) {
        for (std::size_t i = 0; i < n_buckets; ++i) {
            double s0 = sort_free;
            sort_end[i] = s0 + sort_d[i];
            sort_free = sort_end[i];
            emit("sort", "host_cpu", s0, sort_d[i], plan.bucket_raw_bytes[i]);

            double x0 = std::max(link_free, sort_end[i]);
            xfer_end[i] = x0 + xfer_d[i];
            link_free = xfer_end[i];
            if (mode != SimMode::ExtMs)
                emit("transfer", "ext_link", x0, xfer_d[i], plan.bucket_query_bytes[i]);

            double p0 = std::max(flash_free, xfer_end[i]);
            isp_end[i] = p0 + isp_d[i];
            flash_free = isp_end[i];
        }
    } else {
        double t = spill_d;
        for (std::size_t i = 0; i < n_buckets; ++i) {
            emit("sort", "host_cpu", t, sort_d[i], plan.bucket_raw_bytes[i]);
            t += sort_d[i];
            sort_end[i] = t;
        }
        for (std::size_t i = 0; i < n_buckets; ++i) {
            emit("transfer", "ext_link", t, xfer_d[i], plan.bucket_query_bytes[i]);
            t += xfer_d[i];
            xfer_end[i] = t;
        }
        for (std::size_t i = 0; i < n_buckets; ++i) {
            isp_end[i] = t + isp_d[i];
            t = isp_end[i];
        }
    }

    for (std::size_t i = 0; i < n_buckets; ++i) {
        double p0 = isp_end[i] - isp_d[i];
        emit("intersect", "flash", p0, isp_d[i], db_quant[i]);
        if (mode == SimMode::ExtMs) {
            emit("intersect", "ext_link", p0, isp_d[i], db_quant[i]);
            emit("intersect", compute, p0, isp_d[i], db_quant[i] + plan.bucket_query_bytes[i]);
            emit("intersect", "host_dram", p0, isp_d[i], db_quant[i] + dram_bytes[i]);
        } else {
            emit("intersect", compute, p0, isp_d[i], db_quant[i] + plan.bucket_query_bytes[i]);
            emit("intersect", dram_res, p0, isp_d[i], dram_bytes[i]);
        }
    }

    double taxid_start = isp_end.empty() ? 0 : isp_end.back();
    if (taxid_d > 0) {
        emit("taxid", "flash", taxid_start, taxid_d, kss_quant * phases);
        if (mode == SimMode::ExtMs) emit("taxid", "ext_link", taxid_start, taxid_d, kss_quant * phases);
        emit("taxid", compute, taxid_start, taxid_d, kss_quant * phases + plan.intersection_bytes);
        emit("taxid", dram_res, taxid_start, taxid_d, plan.intersection_bytes);
    }

    for (std::size_t i = 0; i < n_buckets; ++i) {
        tl.stage_totals["sort"] += sort_d[i];
        tl.stage_totals["transfer"] += xfer_d[i];
        tl.stage_totals["intersect"] += isp_d[i];
    }
    tl.stage_totals["taxid"] += taxid_d;

    for (const auto& e : tl.events) tl.total = std::max(tl.total, e.end);
    return tl;
}

/// Resource powers for a config: flash is the per-channel NAND entry scaled
/// by channel count; everything else maps one to one. Host DRAM traffic
/// carries no power entry.
inline std::map<std::string, PowerEntry> resolve_power(const PowerModel& pm, const SsdConfig& config) {
    pm.validate();
    std::map<std::string, PowerEntry> r;
    r["flash"] = {pm.nand_per_channel.active_w * config.channels, pm.nand_per_channel.idle_w * config.channels};
    r["internal_dram"] = pm.internal_dram;
    r["accel"] = pm.accelerator;
    r["ctrl_cores"] = pm.controller_cores;
    r["host_cpu"] = pm.host_cpu;
    r["ext_link"] = pm.external_link;
    return r;
}

/// Sum over resources of active power times busy time plus idle power times
/// the remaining time.
inline double energy(const Timeline& tl, const std::map<std::string, PowerEntry>& powers) {
    double joules = 0;
    for (const auto& [resource, entry] : powers) {
        double busy = tl.busy_seconds(resource);
        joules += entry.active_w * busy + entry.idle_w * (tl.total - busy);
    }
    return joules;
}

} // namespace metastore
