#include "doctest.h"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "metastore/db/kmer_db.hpp"
#include "metastore/db/kss.hpp"
#include "metastore/db/species_index.hpp"
#include "metastore/isp/index_generator.hpp"
#include "metastore/util/rng.hpp"
#include "oracles.hpp"

using namespace metastore;

namespace {

std::string random_seq(Rng& rng, int len) {
    static const char bases[] = "ACGT";
    std::string s(static_cast<std::size_t>(len), 'A');
    for (char& c : s) c = bases[rng.next_below(4)];
    return s;
}

// Randomized per-taxon sketches over 3 k-levels, shaped like the default
// sketcher (every taxon contributes the prefixes of its own top members)
// plus cross-taxon smaller-k members that exercise extras and overflow.
PerTaxonSketches random_sketches(Rng& rng, std::span<const int> k_levels, int n_taxa, int s) {
    PerTaxonSketches sketches;
    const int k_max = k_levels[0];
    std::vector<std::vector<PackedKmer>> tops(static_cast<std::size_t>(n_taxa));
    for (int t = 0; t < n_taxa; ++t) {
        auto& members = sketches[TaxId{static_cast<std::uint32_t>(t + 1)}];
        for (int i = 0; i < s; ++i) {
            // Small space so taxa share prefixes (and sometimes k-mers).
            PackedKmer km{Uint128{rng.next_below(1u << 12)} << (128 - 2 * k_max), static_cast<std::uint8_t>(k_max)};
            members.push_back(km);
            tops[static_cast<std::size_t>(t)].push_back(km);
        }
        for (std::size_t li = 1; li < k_levels.size(); ++li)
            for (const PackedKmer& km : tops[static_cast<std::size_t>(t)]) members.push_back(km.prefix(k_levels[li]));
    }
    // Cross-taxon extras: sketch another taxon's top prefix at a smaller k.
    for (int t = 0; t < n_taxa; ++t) {
        auto& members = sketches[TaxId{static_cast<std::uint32_t>(t + 1)}];
        for (int i = 0; i < s / 2; ++i) {
            const auto& other = tops[rng.next_below(static_cast<std::uint64_t>(n_taxa))];
            std::size_t li = 1 + rng.next_below(k_levels.size() - 1);
            members.push_back(other[rng.next_below(other.size())].prefix(k_levels[li]));
        }
        // Overflow: smaller k-mers unrelated to any top entry (high bits set
        // far outside the 12-bit top corner).
        for (int i = 0; i < s / 4; ++i) {
            std::size_t li = 1 + rng.next_below(k_levels.size() - 1);
            int k = k_levels[li];
            PackedKmer km{(Uint128{3} << 126) | (Uint128{rng.next_below(1u << 10)} << (128 - 2 * k)),
                          static_cast<std::uint8_t>(k)};
            members.push_back(km);
        }
    }
    return sketches;
}

} // namespace

TEST_CASE("build_kmer_db examples") {
    std::vector<std::string> one = {"AATCCG"};
    KmerDatabase db = build_kmer_db(one, 5);
    CHECK(db.entries == std::vector<PackedKmer>{pack("AATCC", 5), pack("ATCCG", 5)});

    std::vector<std::string> dup = {"AATCCG", "AATCCG"};
    CHECK(build_kmer_db(dup, 5).entries == db.entries);

    CHECK_THROWS_AS(build_kmer_db({}, 5), BuildError);
}

TEST_CASE("build_kmer_db equals brute-force union") {
    Rng rng(201);
    std::vector<std::string> genomes;
    for (int i = 0; i < 5; ++i) genomes.push_back(random_seq(rng, 400));
    int k = 9;
    auto expect = oracle::naive_kmers(genomes, k);
    std::sort(expect.begin(), expect.end());
    expect.erase(std::unique(expect.begin(), expect.end()), expect.end());
    CHECK(build_kmer_db(genomes, k).entries == expect);
}

TEST_CASE("kmer db serialization is deterministic and round-trips") {
    Rng rng(202);
    std::vector<std::string> genomes = {random_seq(rng, 300)};
    KmerDatabase db = build_kmer_db(genomes, 7);
    std::string a = serialize_kmer_db(db);
    std::string b = serialize_kmer_db(build_kmer_db(genomes, 7));
    CHECK(a == b);
    KmerDatabase back = deserialize_kmer_db(a);
    CHECK(back.k == db.k);
    CHECK(back.entries == db.entries);
}

TEST_CASE("species index examples") {
    SpeciesIndex idx = build_species_index(std::string("CCACCA"), TaxId{7}, 3);
    REQUIRE(idx.entries.size() == 4);
    CHECK(idx.entries[0] == SpeciesIndex::Entry{pack("ACC", 3), 2});
    CHECK(idx.entries[1] == SpeciesIndex::Entry{pack("CAC", 3), 1});
    CHECK(idx.entries[2] == SpeciesIndex::Entry{pack("CCA", 3), 0});
    CHECK(idx.entries[3] == SpeciesIndex::Entry{pack("CCA", 3), 3});
    CHECK(idx.genome_length == 6);

    CHECK(build_species_index(std::string("AC"), TaxId{1}, 3).entries.empty());
}

TEST_CASE("species index equals window enumeration; locations in range") {
    Rng rng(203);
    std::string genome = random_seq(rng, 600);
    int k = 5;
    SpeciesIndex idx = build_species_index(genome, TaxId{9}, k);
    CHECK(idx.entries.size() == genome.size() - static_cast<std::size_t>(k) + 1);
    std::vector<std::pair<PackedKmer, std::uint64_t>> expect;
    for (std::size_t i = 0; i + static_cast<std::size_t>(k) <= genome.size(); ++i)
        expect.emplace_back(pack(genome.substr(i, static_cast<std::size_t>(k)), k), i);
    std::sort(expect.begin(), expect.end());
    for (std::size_t i = 0; i < expect.size(); ++i) {
        CHECK(idx.entries[i].kmer == expect[i].first);
        CHECK(idx.entries[i].location == expect[i].second);
        CHECK(idx.entries[i].location < idx.genome_length);
    }

    std::string data = serialize_species_index(idx);
    SpeciesIndex back = deserialize_species_index(data);
    CHECK(back.tax == idx.tax);
    CHECK(back.entries == idx.entries);
    CHECK(back.genome_length == idx.genome_length);
}

TEST_CASE("build_kss: figure example") {
    // Top table: AATCC -> {T1}; T2 sketches the 4-mer AATC.
    PerTaxonSketches sketches;
    sketches[TaxId{1}] = {pack("AATCC", 5), pack("AATC", 4)};
    sketches[TaxId{2}] = {pack("AATC", 4)};
    std::vector<int> levels = {5, 4};
    KssSketch kss = build_kss(sketches, levels);

    REQUIRE(kss.top_table.size() == 1);
    CHECK(kss.top_table[0].kmer == pack("AATCC", 5));
    CHECK(kss.top_table[0].taxa == TaxList{TaxId{1}});
    REQUIRE(kss.extras_tables.size() == 1);
    REQUIRE(kss.extras_tables[0].size() == 1);
    // T1 also sketches AATC but is already attributed to the top entry.
    CHECK(kss.extras_tables[0][0] == TaxList{TaxId{2}});
    CHECK(kss.overflow_tables[0].empty());

    CHECK(kss.reconstruct(4, pack("AATC", 4)) == TaxList{TaxId{1}, TaxId{2}});
    CHECK(kss.sketch_size(TaxId{1}, 5) == 1);
    CHECK(kss.sketch_size(TaxId{1}, 4) == 1);
    CHECK(kss.sketch_size(TaxId{2}, 4) == 1);
}

TEST_CASE("build_kss rejects bad inputs") {
    PerTaxonSketches sketches;
    sketches[TaxId{1}] = {pack("AAAAA", 5)};
    std::vector<int> increasing = {4, 5};
    CHECK_THROWS_AS(build_kss(sketches, increasing), BuildError);
    std::vector<int> levels = {5, 4};
    PerTaxonSketches bad;
    bad[TaxId{1}] = {pack("AAA", 3)}; // 3 is not a level
    CHECK_THROWS_AS(build_kss(bad, levels), BuildError);
}

TEST_CASE("kss reconstruction matches the flat-table oracle") {
    std::vector<int> levels = {16, 12, 8};
    Rng rng(204);
    for (int iter = 0; iter < 25; ++iter) {
        PerTaxonSketches sketches = random_sketches(rng, levels, 4, 12);
        KssSketch kss = build_kss(sketches, levels);
        oracle::FlatTables flat = oracle::flat_tables(sketches, levels);
        for (std::size_t li = 1; li < levels.size(); ++li) {
            int k = levels[li];
            for (const auto& [p, taxa] : flat.ext.at(k)) {
                TaxList expect(taxa.begin(), taxa.end());
                CHECK(kss.reconstruct(k, p) == expect);
            }
        }
        // Reconstruction invariant: extras never repeat a top attribution.
        for (std::size_t li = 1; li < levels.size(); ++li) {
            std::size_t pos = 0;
            std::size_t i = 0;
            while (i < kss.top_table.size()) {
                PackedKmer p = kss.top_table[i].kmer.prefix(levels[li]);
                std::set<TaxId> top_union;
                while (i < kss.top_table.size() && kss.top_table[i].kmer.prefix(levels[li]) == p) {
                    top_union.insert(kss.top_table[i].taxa.begin(), kss.top_table[i].taxa.end());
                    ++i;
                }
                for (TaxId t : kss.extras_tables[li - 1][pos]) CHECK(top_union.count(t) == 0);
                ++pos;
            }
            CHECK(kss.extras_tables[li - 1].size() == pos);
        }
    }
}

TEST_CASE("extras table length equals the index generator's distinct prefix count") {
    std::vector<int> levels = {16, 12, 8};
    Rng rng(205);
    PerTaxonSketches sketches = random_sketches(rng, levels, 5, 16);
    KssSketch kss = build_kss(sketches, levels);
    std::vector<PackedKmer> top_kmers;
    for (const auto& e : kss.top_table) top_kmers.push_back(e.kmer);
    for (std::size_t li = 1; li < levels.size(); ++li) {
        auto positions = index_positions(top_kmers, levels[li]);
        REQUIRE(!positions.empty());
        CHECK(kss.extras_tables[li - 1].size() == static_cast<std::size_t>(positions.back()) + 1);
    }
}

TEST_CASE("kss serialization round-trips, is deterministic, and beats the flat table") {
    std::vector<int> levels = {16, 12, 8};
    Rng rng(206);
    PerTaxonSketches sketches = random_sketches(rng, levels, 6, 16);
    KssSketch kss = build_kss(sketches, levels);
    std::string a = serialize_kss(kss);
    CHECK(a == serialize_kss(build_kss(sketches, levels)));

    KssSketch back = deserialize_kss(a);
    CHECK(back.k_levels == kss.k_levels);
    REQUIRE(back.top_table.size() == kss.top_table.size());
    for (std::size_t i = 0; i < back.top_table.size(); ++i) {
        CHECK(back.top_table[i].kmer == kss.top_table[i].kmer);
        CHECK(back.top_table[i].taxa == kss.top_table[i].taxa);
    }
    CHECK(back.extras_tables == kss.extras_tables);
    CHECK(back.sketch_sizes == kss.sketch_sizes);
    REQUIRE(back.overflow_tables.size() == kss.overflow_tables.size());
    for (std::size_t li = 0; li < back.overflow_tables.size(); ++li) {
        REQUIRE(back.overflow_tables[li].size() == kss.overflow_tables[li].size());
        for (std::size_t i = 0; i < back.overflow_tables[li].size(); ++i) {
            CHECK(back.overflow_tables[li][i].kmer == kss.overflow_tables[li][i].kmer);
            CHECK(back.overflow_tables[li][i].taxa == kss.overflow_tables[li][i].taxa);
        }
    }

    CHECK(a.size() <= flat_table_bytes(sketches, levels));
}

TEST_CASE("minhash sketch: bounded, deterministic, prefix-derived levels") {
    Rng rng(207);
    std::vector<std::string> genome = {random_seq(rng, 2000)};
    std::vector<int> levels = {20, 15, 10};
    auto sketch = make_minhash_sketch(genome, levels, 32);
    auto again = make_minhash_sketch(genome, levels, 32);
    CHECK(sketch == again);

    std::set<PackedKmer> top, mid, low;
    for (const PackedKmer& km : sketch) {
        if (km.k == 20) top.insert(km);
        if (km.k == 15) mid.insert(km);
        if (km.k == 10) low.insert(km);
    }
    CHECK(top.size() == 32);
    CHECK(mid.size() <= 32);
    CHECK(!mid.empty());
    for (const PackedKmer& km : top) {
        CHECK(mid.count(km.prefix(15)) == 1);
        CHECK(low.count(km.prefix(10)) == 1);
    }
    // Every smaller member is a prefix of some top member.
    for (const PackedKmer& p : mid) {
        bool found = false;
        for (const PackedKmer& km : top)
            if (km.prefix(15) == p) found = true;
        CHECK(found);
    }
}
