#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "metastore/core/kmer.hpp"
#include "metastore/prep/bucket.hpp"
#include "metastore/prep/fastx.hpp"
#include "metastore/util/rng.hpp"
#include "oracles.hpp"

using namespace metastore;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<PackedKmer> random_kmers(Rng& rng, std::size_t n, int k) {
    std::vector<PackedKmer> v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) v.push_back(rng.random_kmer(k));
    return v;
}

std::string random_read(Rng& rng, int len) {
    static const char bases[] = "ACGT";
    std::string s(static_cast<std::size_t>(len), 'A');
    for (char& c : s) c = bases[rng.next_below(4)];
    return s;
}

} // namespace

TEST_CASE("plan: uniform sample, target 4 balances a fresh draw") {
    Rng rng(101);
    auto sample = random_kmers(rng, 100000, 60);
    BucketPlan plan = plan_buckets(sample, 4);
    REQUIRE(plan.bucket_count() == 4);

    auto fresh = random_kmers(rng, 100000, 60);
    std::vector<std::uint64_t> load(4, 0);
    for (const auto& km : fresh) load[plan.bucket_of(km)] += 1;
    for (std::uint64_t n : load) {
        CHECK(n >= 15000); // 25% +- 10% of 1e5
        CHECK(n <= 35000);
    }
}

TEST_CASE("plan: single distinct k-mer collapses to one bucket") {
    std::vector<PackedKmer> sample(500, pack("ACGTACGT", 8));
    BucketPlan plan = plan_buckets(sample, 512);
    CHECK(plan.bucket_count() == 1);
    CHECK(plan.boundaries[0] == min_kmer(8));
}

TEST_CASE("plan: skewed sample stays within target and uses sample quantiles") {
    Rng rng(102);
    std::vector<PackedKmer> sample;
    // Heavy skew: 90% of mass in a tiny corner of the space.
    for (int i = 0; i < 90000; ++i) sample.push_back(PackedKmer{Uint128{rng.next_below(4096)} << 8, 60});
    for (int i = 0; i < 10000; ++i) sample.push_back(rng.random_kmer(60));
    BucketPlan plan = plan_buckets(sample, 512);
    CHECK(plan.bucket_count() <= 512);
    std::set<Uint128> sample_bits;
    for (const auto& km : sample) sample_bits.insert(km.bits);
    for (std::size_t i = 1; i < plan.boundaries.size(); ++i) // [0] is forced to the key-space minimum
        CHECK(sample_bits.count(plan.boundaries[i].bits) == 1);
    CHECK_THROWS_AS(plan_buckets({}, 4), PlanError);
}

TEST_CASE("extract: example read and short read") {
    std::vector<PackedKmer> sample = {pack("AAAAA", 5), pack("TTTTT", 5)};
    BucketPlan plan = plan_buckets(sample, 2);
    std::vector<std::string> reads = {"AATCCG"};
    ExtractResult res = extract(reads, 5, plan, 1 << 20);
    CHECK(res.total_kmers == 2);
    std::vector<PackedKmer> all;
    for (const auto& b : res.buckets) {
        for (const auto& km : b.kmers) {
            CHECK(b.contains(km));
            all.push_back(km);
        }
    }
    std::sort(all.begin(), all.end());
    CHECK(all == std::vector<PackedKmer>{pack("AATCC", 5), pack("ATCCG", 5)});

    std::vector<std::string> tiny = {"ACG"};
    ExtractResult none = extract(tiny, 5, plan, 1 << 20);
    CHECK(none.total_kmers == 0);
}

TEST_CASE("extract: multiset equals brute-force extraction; conservation") {
    Rng rng(103);
    std::vector<std::string> reads;
    for (int i = 0; i < 10000; ++i) reads.push_back(random_read(rng, 20 + static_cast<int>(rng.next_below(60))));
    int k = 11;

    auto expected = oracle::naive_kmers(reads, k);
    std::sort(expected.begin(), expected.end());

    std::vector<PackedKmer> sample(expected.begin(), expected.begin() + std::min<std::size_t>(expected.size(), 5000));
    BucketPlan plan = plan_buckets(sample, 16);
    ExtractResult res = extract(reads, k, plan, 1ull << 30);

    std::uint64_t total = 0;
    std::vector<PackedKmer> got;
    for (const auto& b : res.buckets) {
        total += b.kmers.size();
        got.insert(got.end(), b.kmers.begin(), b.kmers.end());
    }
    CHECK(total == res.total_kmers); // conservation
    std::sort(got.begin(), got.end());
    CHECK(got == expected);
}

TEST_CASE("extract: bucket-local sort concatenates to a globally sorted stream") {
    Rng rng(104);
    std::vector<std::string> reads;
    for (int i = 0; i < 2000; ++i) reads.push_back(random_read(rng, 40));
    int k = 13;
    auto sample = oracle::naive_kmers(reads, k);
    BucketPlan plan = plan_buckets(sample, 8);
    ExtractResult res = extract(reads, k, plan, 1ull << 30);

    std::vector<PackedKmer> concat;
    for (auto& b : res.buckets) {
        auto counts = sort_and_count(b);
        for (const auto& [km, n] : counts) concat.push_back(km);
    }
    CHECK(std::is_sorted(concat.begin(), concat.end()));
    CHECK(std::adjacent_find(concat.begin(), concat.end()) == concat.end());
}

TEST_CASE("extract: dram budget pins buckets and bounds spill writes") {
    Rng rng(105);
    std::vector<std::string> reads;
    for (int i = 0; i < 3000; ++i) reads.push_back(random_read(rng, 32));
    int k = 9;
    auto sample = oracle::naive_kmers(reads, k);
    BucketPlan big_plan = plan_buckets(sample, 8);

    // Budget larger than everything: nothing is pinned to SSD.
    ExtractResult roomy = extract(reads, k, big_plan, 1ull << 40);
    for (const auto& b : roomy.buckets) {
        CHECK(b.location == Pin::Dram);
        CHECK(b.spill_writes == 0);
    }

    // Tight budget: some buckets spill, with buffered sequential appends.
    BucketPlan tight_plan = plan_buckets(sample, 8);
    ExtractOptions opts;
    opts.spill_buffer_bytes = 1024;
    ExtractResult tight = extract(reads, k, tight_plan, 64 * 1024, opts);
    bool any_ssd = false;
    for (std::size_t i = 0; i < tight.buckets.size(); ++i) {
        const Bucket& b = tight.buckets[i];
        if (b.location == Pin::Ssd) {
            any_ssd = true;
            CHECK(tight_plan.pinned[i] == Pin::Ssd);
            std::uint64_t max_writes = (b.bytes() + opts.spill_buffer_bytes - 1) / opts.spill_buffer_bytes;
            CHECK(b.spill_writes <= max_writes);
            CHECK(b.spilled_bytes == b.bytes());
        }
    }
    CHECK(any_ssd);
    CHECK(tight.dram_bytes <= 64 * 1024);
}

TEST_CASE("extract: spill files are valid MSBK") {
    auto dir = fresh_dir("metastore_test_spill");
    Rng rng(106);
    std::vector<std::string> reads;
    for (int i = 0; i < 500; ++i) reads.push_back(random_read(rng, 40));
    int k = 9;
    auto sample = oracle::naive_kmers(reads, k);
    BucketPlan plan = plan_buckets(sample, 4);
    ExtractOptions opts;
    opts.spill_dir = dir;
    ExtractResult res = extract(reads, k, plan, 4096, opts);
    bool checked = false;
    for (std::size_t i = 0; i < res.buckets.size(); ++i) {
        if (res.buckets[i].location != Pin::Ssd) continue;
        BucketFile bf = read_bucket_file(dir / ("bucket" + std::to_string(i) + ".msbk"));
        CHECK(bf.k == k);
        CHECK(!bf.sorted_unique);
        CHECK(bf.kmers == res.buckets[i].kmers);
        checked = true;
    }
    CHECK(checked);
}

TEST_CASE("sort_and_count examples and oracle") {
    Bucket b;
    b.lo = min_kmer(5);
    b.kmers = {pack("AATCC", 5), pack("AATCC", 5), pack("ATCCG", 5)};
    auto counts = sort_and_count(b);
    REQUIRE(counts.size() == 2);
    CHECK(counts[0] == KmerCount{pack("AATCC", 5), 2});
    CHECK(counts[1] == KmerCount{pack("ATCCG", 5), 1});

    // Already sorted unique input: identical output with counts 1.
    Bucket u;
    u.lo = min_kmer(5);
    u.kmers = {pack("AAAAA", 5), pack("CCCCC", 5), pack("GGGGG", 5)};
    auto unit = sort_and_count(u);
    REQUIRE(unit.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(unit[i].first == u.kmers[i]);
        CHECK(unit[i].second == 1);
    }

    Rng rng(107);
    Bucket r;
    r.lo = min_kmer(7);
    for (int i = 0; i < 5000; ++i) r.kmers.push_back(rng.random_kmer(3)); // small space forces repeats
    auto expect = oracle::naive_sort_count(r.kmers);
    auto got = sort_and_count(r);
    CHECK(got == expect);
}

TEST_CASE("filter examples and oracle") {
    std::vector<KmerCount> counts = {{pack("AAA", 3), 1}, {pack("CCC", 3), 2}, {pack("GGG", 3), 9}};
    FilterPolicy policy{2, 5};
    CHECK(filter(counts, policy) == std::vector<PackedKmer>{pack("CCC", 3)});

    FilterPolicy keep_all{1, std::nullopt};
    CHECK(filter(counts, keep_all).size() == 3);

    FilterPolicy bad{5, 2};
    CHECK_THROWS_AS(filter(counts, bad), ConfigError);

    Rng rng(108);
    std::vector<KmerCount> rc;
    for (int i = 0; i < 3000; ++i) {
        PackedKmer km = rng.random_kmer(9);
        rc.emplace_back(km, 1 + rng.next_below(10));
    }
    std::sort(rc.begin(), rc.end());
    rc.erase(std::unique(rc.begin(), rc.end(),
                         [](const KmerCount& a, const KmerCount& b) { return a.first == b.first; }),
             rc.end());
    auto expect = oracle::naive_filter(rc, 3, 7);
    CHECK(filter(rc, FilterPolicy{3, 7}) == expect);
}

TEST_CASE("bucket file round-trip with sorted flag") {
    auto dir = fresh_dir("metastore_test_msbk");
    std::vector<PackedKmer> kmers = {pack("AAC", 3), pack("ACG", 3), pack("TTT", 3)};
    write_bucket_file(dir / "b.msbk", 3, kmers, true);
    BucketFile bf = read_bucket_file(dir / "b.msbk");
    CHECK(bf.k == 3);
    CHECK(bf.sorted_unique);
    CHECK(bf.kmers == kmers);
}

TEST_CASE("fastq reader: plain, gzip, malformed") {
    auto dir = fresh_dir("metastore_test_fastq");
    {
        std::ofstream os(dir / "ok.fastq");
        os << "@r1\nAATCCG\n+\nIIIIII\n@r2 extra\nACGT\n+r2\nIIII\n";
    }
    FastqReader reader(dir / "ok.fastq");
    FastqRecord rec;
    REQUIRE(reader.next(rec));
    CHECK(rec.name == "r1");
    CHECK(rec.seq == "AATCCG");
    REQUIRE(reader.next(rec));
    CHECK(rec.seq == "ACGT");
    CHECK(!reader.next(rec));

    {
        gzFile gz = gzopen((dir / "ok.fastq.gz").string().c_str(), "wb");
        const char* content = "@g1\nTTTTAAAA\n+\nIIIIIIII\n";
        gzwrite(gz, content, static_cast<unsigned>(std::string(content).size()));
        gzclose(gz);
    }
    FastqReader gzreader(dir / "ok.fastq.gz");
    REQUIRE(gzreader.next(rec));
    CHECK(rec.seq == "TTTTAAAA");
    CHECK(!gzreader.next(rec));

    {
        std::ofstream os(dir / "bad.fastq");
        os << "@r1\nAATCCG\n+\nIII\n"; // quality length mismatch
    }
    FastqReader bad(dir / "bad.fastq");
    CHECK_THROWS_WITH_AS(bad.next(rec), doctest::Contains("record 0"), ParseError);

    {
        std::ofstream os(dir / "trunc.fastq");
        os << "@r1\nAATCCG\n+\nIIIIII\n@r2\nACGT\n";
    }
    FastqReader trunc(dir / "trunc.fastq");
    REQUIRE(trunc.next(rec));
    CHECK_THROWS_WITH_AS(trunc.next(rec), doctest::Contains("record 1"), ParseError);

    CHECK_THROWS_AS(FastqReader(dir / "missing.fastq"), IoError);
}

TEST_CASE("fasta reader") {
    auto dir = fresh_dir("metastore_test_fasta");
    {
        std::ofstream os(dir / "refs.fasta");
        os << ">genome1 desc\nAATC\nCG\n>genome2\nTTTT\n";
    }
    FastaReader reader(dir / "refs.fasta");
    FastaRecord rec;
    REQUIRE(reader.next(rec));
    CHECK(rec.name == "genome1 desc");
    CHECK(rec.seq == "AATCCG");
    REQUIRE(reader.next(rec));
    CHECK(rec.name == "genome2");
    CHECK(rec.seq == "TTTT");
    CHECK(!reader.next(rec));
}
