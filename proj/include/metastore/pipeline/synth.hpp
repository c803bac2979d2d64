#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "metastore/core/errors.hpp"
#include "metastore/core/kmer.hpp"
#include "metastore/util/rng.hpp"

namespace metastore {

/// Synthetic ground-truth data for tests and acceptance runs: iid random
/// genomes (disjoint k-mer content at any realistic k) and error-free reads
/// drawn from a known taxon mixture.
struct SynthSample {
    std::vector<TaxId> taxa;             // taxa[i] owns genomes[i]
    std::vector<std::string> genomes;
    std::vector<std::string> reads;
    std::vector<std::uint32_t> read_taxon; // index into taxa
    std::vector<std::uint64_t> true_counts;  // reads drawn per taxon
};

inline std::string random_genome(Rng& rng, std::size_t length) {
    static const char bases[] = "ACGT";
    std::string g(length, 'A');
    for (char& c : g) c = bases[rng.next_below(4)];
    return g;
}

/// `weights` may be shorter than `n_taxa`; trailing taxa get weight 0 and
/// act as database-only decoys.
inline SynthSample make_synth_sample(std::uint64_t seed, int n_taxa, std::size_t genome_len,
                                     std::span<const double> weights, std::uint64_t n_reads, int read_len) {
    if (n_taxa < 1) throw ConfigError("need at least one taxon");
    if (static_cast<std::size_t>(read_len) > genome_len) throw ConfigError("read length exceeds genome length");
    Rng rng(seed);
    SynthSample s;
    for (int i = 0; i < n_taxa; ++i) {
        s.taxa.push_back(TaxId{static_cast<std::uint32_t>(100 + i)});
        s.genomes.push_back(random_genome(rng, genome_len));
    }
    std::vector<double> w(weights.begin(), weights.end());
    w.resize(static_cast<std::size_t>(n_taxa), 0.0);
    s.true_counts.assign(static_cast<std::size_t>(n_taxa), 0);
    for (std::uint64_t r = 0; r < n_reads; ++r) {
        std::size_t t = rng.pick_weighted(w);
        std::size_t pos = rng.next_below(genome_len - static_cast<std::size_t>(read_len) + 1);
        s.reads.push_back(s.genomes[t].substr(pos, static_cast<std::size_t>(read_len)));
        s.read_taxon.push_back(static_cast<std::uint32_t>(t));
        s.true_counts[t] += 1;
    }
    return s;
}

inline void write_fasta(const std::filesystem::path& path, const std::string& name, const std::string& seq) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << '>' << name << '\n';
    for (std::size_t i = 0; i < seq.size(); i += 80) os << seq.substr(i, 80) << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

inline void write_fastq(const std::filesystem::path& path, std::span<const std::string> reads) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    for (std::size_t i = 0; i < reads.size(); ++i)
        os << "@read" << i << '\n' << reads[i] << '\n' << "+\n" << std::string(reads[i].size(), 'I') << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

} // namespace metastore
