#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "metastore/core/errors.hpp"
#include "metastore/isp/retrieve.hpp"
#include "metastore/pipeline/run.hpp"
#include "metastore/sim/simulate.hpp"

namespace metastore {

namespace detail {

inline std::string fixed9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9f", v);
    return buf;
}

inline std::ofstream open_report(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    return os;
}

} // namespace detail

inline void write_presence_csv(const std::filesystem::path& path, const std::set<TaxId>& presence) {
    auto os = detail::open_report(path);
    os << "tax_id\n";
    for (TaxId tax : presence) os << tax.value << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

inline void write_hits_csv(const std::filesystem::path& path, const HitTable& hits) {
    auto os = detail::open_report(path);
    hits.to_csv(os);
    if (!os) throw IoError("write failed: " + path.string());
}

/// tax_id 0 carries the unclassified count (0 is reserved for it).
inline void write_abundance_csv(const std::filesystem::path& path, const AbundanceReport& report) {
    auto os = detail::open_report(path);
    os << "tax_id,reads,fraction\n";
    for (const auto& [tax, n] : report.read_counts)
        os << tax.value << ',' << n << ',' << detail::fixed9(report.fractions.at(tax)) << '\n';
    os << "0," << report.unclassified << ',' << detail::fixed9(0.0) << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

inline void write_timeline_csv(const std::filesystem::path& path, const Timeline& tl) {
    auto os = detail::open_report(path);
    os << "stage,resource,start,end,bytes\n";
    for (const auto& e : tl.events)
        os << e.stage << ',' << e.resource << ',' << detail::fixed9(e.start) << ',' << detail::fixed9(e.end) << ','
           << e.bytes << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

/// Summary mirrors the step breakdown: input processing (host sort +
/// transfer), intersection finding, tax-ID retrieval.
inline nlohmann::ordered_json summary_json(const ClassifyResult& result, const RunPlan& plan,
                                           const AbundanceReport* abundance) {
    const Timeline& tl = result.timeline;
    nlohmann::ordered_json j;
    j["mode"] = to_string(plan.mode);
    j["ssd"] = plan.ssd.name;
    j["samples"] = plan.samples.size();
    j["total_seconds"] = tl.total;
    j["energy_joules"] = tl.energy_joules;
    j["taxid_phases"] = tl.taxid_phases;
    j["stages"] = {{"input_processing",
                    tl.stage_total("spill") + tl.stage_total("sort") + tl.stage_total("transfer")},
                   {"intersection_finding", tl.stage_total("intersect")},
                   {"taxid_retrieval", tl.stage_total("taxid")}};

    std::uint64_t total_kmers = 0, filtered = 0, intersecting = 0;
    nlohmann::ordered_json presence = nlohmann::ordered_json::array();
    std::set<TaxId> all_present;
    for (const auto& s : result.samples) {
        total_kmers += s.total_kmers;
        filtered += s.filtered_kmers;
        intersecting += s.intersecting_kmers;
        for (TaxId t : s.presence) all_present.insert(t);
    }
    for (TaxId t : all_present) presence.push_back(t.value);
    j["extracted_kmers"] = total_kmers;
    j["filtered_kmers"] = filtered;
    j["intersecting_kmers"] = intersecting;
    j["present_taxa"] = presence;
    nlohmann::ordered_json groups = nlohmann::ordered_json::array();
    for (const auto& g : result.groups) groups.push_back(g.size());
    j["db_passes"] = groups;

    if (abundance) {
        j["classified_reads"] = abundance->total_reads - abundance->unclassified;
        j["unclassified_reads"] = abundance->unclassified;
        j["total_reads"] = abundance->total_reads;
    }
    return j;
}

struct ReportPaths {
    std::vector<std::filesystem::path> files;
};

/// Writes every report for a finished run into `out_dir`: presence.csv,
/// hits.csv, timeline.csv, summary.json, and abundance.csv when abundance
/// was computed. Byte-identical for identical runs.
inline ReportPaths write_reports(const std::filesystem::path& out_dir, const ClassifyResult& result,
                                 const RunPlan& plan, const AbundanceReport* abundance = nullptr) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir.string());

    ReportPaths paths;
    std::set<TaxId> all_present;
    HitTable all_hits;
    for (const auto& s : result.samples) {
        for (TaxId t : s.presence) all_present.insert(t);
        for (const auto& [key, n] : s.hits.counts) all_hits.add(key.first, key.second, n);
    }

    auto emit = [&](const std::filesystem::path& p) { paths.files.push_back(p); };

    write_presence_csv(out_dir / "presence.csv", all_present);
    emit(out_dir / "presence.csv");
    write_hits_csv(out_dir / "hits.csv", all_hits);
    emit(out_dir / "hits.csv");
    write_timeline_csv(out_dir / "timeline.csv", result.timeline);
    emit(out_dir / "timeline.csv");
    for (std::size_t i = 0; i < result.samples.size(); ++i) {
        // Intersection spill, same record layout as the k-mer database.
        KmerDatabase inter;
        inter.k = plan.k;
        inter.entries = result.samples[i].intersection;
        std::filesystem::path p = out_dir / ("intersection" + std::to_string(i) + ".mskd");
        save_kmer_db(inter, p);
        emit(p);
    }
    if (abundance) {
        write_abundance_csv(out_dir / "abundance.csv", *abundance);
        emit(out_dir / "abundance.csv");
    }
    {
        auto os = detail::open_report(out_dir / "summary.json");
        os << summary_json(result, plan, abundance).dump(2) << '\n';
        if (!os) throw IoError("write failed: summary.json");
        emit(out_dir / "summary.json");
    }
    return paths;
}

} // namespace metastore
