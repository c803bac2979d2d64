#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "metastore/core/errors.hpp"
#include "metastore/core/kmer.hpp"
#include "metastore/db/kss.hpp"
#include "metastore/isp/index_generator.hpp"

namespace metastore {

/// Per (taxon, k-level) count of matched sketch positions.
struct HitTable {
    std::map<std::pair<TaxId, int>, std::uint64_t> counts;

    void add(TaxId tax, int k, std::uint64_t n = 1) { counts[{tax, k}] += n; }

    std::uint64_t at(TaxId tax, int k) const {
        auto it = counts.find({tax, k});
        return it == counts.end() ? 0 : it->second;
    }

    bool empty() const { return counts.empty(); }

    void to_csv(std::ostream& os) const {
        os << "tax_id,k,hits\n";
        for (const auto& [key, n] : counts) os << key.first.value << ',' << key.second << ',' << n << '\n';
    }
};

struct RetrieveOptions {
    /// false: one hit per distinct query prefix per taxon (default);
    /// true: one hit per query k-mer per taxon (sensitivity studies).
    bool per_query = false;
};

/// Cursor accounting, exposed so tests can assert the single-pass contract.
struct RetrieveStats {
    std::uint64_t top_consumed = 0;
    std::vector<std::uint64_t> extras_consumed;   // per smaller level
    std::vector<std::uint64_t> overflow_consumed; // per smaller level
};

/// Streams the sorted intersection against the KSS in one synchronized
/// pass: top-table equality gives k_max hits; for every smaller level the
/// extras cursor advances with the top stream's prefix changes (the index
/// generator rule) while prefix runs accumulate their top taxa, and query
/// prefixes that cannot be a top prefix fall through to the overflow table.
/// No cursor ever rewinds.
inline HitTable retrieve_taxids(std::span<const PackedKmer> intersection, const KssSketch& kss,
                                const RetrieveOptions& opts = {}, RetrieveStats* stats = nullptr) {
    if (!intersection.empty() && intersection.front().k != kss.k_max())
        throw ConfigError("query k=" + std::to_string(intersection.front().k) +
                          " does not match KSS k_max=" + std::to_string(kss.k_max()));

    const auto& top = kss.top_table;
    const int k_max = kss.k_max();
    const std::size_t n_levels = kss.k_levels.size() - 1;

    struct LevelState {
        int k = 0;
        bool run_open = false;
        PackedKmer run_prefix;
        std::set<TaxId> run_taxa;
        std::int64_t extras_pos = -1;
        std::uint64_t run_query_hits = 0;
        std::size_t overflow_pos = 0;
        bool have_prev_overflow = false;
        PackedKmer prev_overflow_prefix;
    };
    std::vector<LevelState> levels(n_levels);
    for (std::size_t li = 0; li < n_levels; ++li) levels[li].k = kss.k_levels[li + 1];

    HitTable hits;

    auto close_run = [&](LevelState& st, std::size_t li) {
        if (!st.run_open || st.run_query_hits == 0) {
            st.run_taxa.clear();
            st.run_query_hits = 0;
            return;
        }
        std::uint64_t n = opts.per_query ? st.run_query_hits : 1;
        for (TaxId t : st.run_taxa) hits.add(t, st.k, n);
        for (TaxId t : kss.extras_tables[li][static_cast<std::size_t>(st.extras_pos)])
            if (!st.run_taxa.count(t)) hits.add(t, st.k, n);
        st.run_taxa.clear();
        st.run_query_hits = 0;
    };

    auto open_run = [&](LevelState& st, std::size_t li, const PackedKmer& p) {
        close_run(st, li);
        st.run_open = true;
        st.run_prefix = p;
        st.extras_pos += 1;
    };

    auto check_order = [&](std::size_t qi) {
        if (qi > 0 && !(intersection[qi - 1] < intersection[qi]))
            throw OrderError("intersection stream not strictly increasing at position " + std::to_string(qi));
    };

    std::size_t qi = 0, ti = 0;
    while (qi < intersection.size() || ti < top.size()) {
        if (ti < top.size() && (qi == intersection.size() || !(intersection[qi] < top[ti].kmer))) {
            // Consume the next top entry: maintain every level's run, then
            // record k_max equality.
            const auto& entry = top[ti];
            for (std::size_t li = 0; li < n_levels; ++li) {
                LevelState& st = levels[li];
                PackedKmer p = entry.kmer.prefix(st.k);
                if (!st.run_open || !(p == st.run_prefix)) open_run(st, li, p);
                st.run_taxa.insert(entry.taxa.begin(), entry.taxa.end());
            }
            if (qi < intersection.size()) {
                check_order(qi);
                if (intersection[qi] == entry.kmer)
                    for (TaxId t : entry.taxa) hits.add(t, k_max);
            }
            ++ti;
            continue;
        }

        // Consume the next query k-mer for the smaller levels.
        check_order(qi);
        const PackedKmer q = intersection[qi];
        for (std::size_t li = 0; li < n_levels; ++li) {
            LevelState& st = levels[li];
            PackedKmer p = q.prefix(st.k);
            if (st.run_open && p == st.run_prefix) {
                st.run_query_hits += 1;
            } else if (ti < top.size() && p == top[ti].kmer.prefix(st.k)) {
                // The run for this prefix starts at the next top entry;
                // open it now so the hit is scored when the run closes.
                open_run(st, li, p);
                st.run_query_hits += 1;
            } else {
                // Confirmed absent from the top table: overflow lookup.
                const auto& overflow = kss.overflow_tables[li];
                while (st.overflow_pos < overflow.size() && overflow[st.overflow_pos].kmer < p) ++st.overflow_pos;
                if (st.overflow_pos < overflow.size() && overflow[st.overflow_pos].kmer == p) {
                    bool repeat = st.have_prev_overflow && st.prev_overflow_prefix == p;
                    if (opts.per_query || !repeat)
                        for (TaxId t : overflow[st.overflow_pos].taxa) hits.add(t, st.k);
                    st.have_prev_overflow = true;
                    st.prev_overflow_prefix = p;
                }
            }
        }
        ++qi;
    }
    for (std::size_t li = 0; li < n_levels; ++li) close_run(levels[li], li);

    if (stats) {
        stats->top_consumed = ti;
        stats->extras_consumed.clear();
        stats->overflow_consumed.clear();
        for (const LevelState& st : levels) {
            stats->extras_consumed.push_back(static_cast<std::uint64_t>(st.extras_pos + 1));
            stats->overflow_consumed.push_back(st.overflow_pos);
        }
    }
    return hits;
}

/// Presence decision: a taxon is present when its best per-level
/// containment, hits(tax, k) / sketch_size(tax, k), reaches theta.
inline std::set<TaxId> decide_presence(const HitTable& hits, const KssSketch& kss, double theta) {
    if (theta < 0.0 || theta > 1.0) throw ConfigError("theta must be in [0, 1]");
    std::set<TaxId> present;
    for (const auto& [key, n] : hits.counts) {
        const auto& [tax, k] = key;
        std::uint64_t size = kss.sketch_size(tax, k);
        if (size == 0)
            throw DataError("taxon " + std::to_string(tax.value) + " has hits at k=" + std::to_string(k) +
                            " but sketch size 0");
        if (static_cast<double>(n) / static_cast<double>(size) >= theta) present.insert(tax);
    }
    return present;
}

} // namespace metastore
