// metastore: cooperative host/SSD metagenomic analysis toolkit.
//
// Subcommands cover the offline builders (build-db, build-kss, build-index),
// host-side query preparation (prep), end-to-end classification and
// abundance estimation backed by the SSD timing model (classify, abundance),
// the standalone simulator (simulate), report regeneration (report), and a
// synthetic ground-truth generator (gen).
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "metastore/core/errors.hpp"
#include "metastore/db/kmer_db.hpp"
#include "metastore/db/kss.hpp"
#include "metastore/db/species_index.hpp"
#include "metastore/pipeline/report.hpp"
#include "metastore/pipeline/run.hpp"
#include "metastore/pipeline/synth.hpp"
#include "metastore/prep/bucket.hpp"
#include "metastore/prep/fastx.hpp"
#include "metastore/sim/config.hpp"
#include "metastore/sim/simulate.hpp"

namespace fs = std::filesystem;
using namespace metastore;

namespace {

struct TaxRef {
    TaxId tax;
    fs::path path;
};

TaxRef parse_tax_ref(const std::string& arg) {
    auto eq = arg.find('=');
    if (eq == std::string::npos)
        throw ConfigError("reference must be given as TAXID=PATH, got '" + arg + "'");
    unsigned long id = 0;
    try {
        id = std::stoul(arg.substr(0, eq));
    } catch (const std::exception&) {
        throw ConfigError("bad tax ID in '" + arg + "'");
    }
    if (id == 0) throw ConfigError("tax ID 0 is reserved for 'unclassified'");
    return {TaxId{static_cast<std::uint32_t>(id)}, fs::path(arg.substr(eq + 1))};
}

std::vector<std::string> read_fasta_records(const fs::path& path) {
    std::vector<std::string> seqs;
    FastaReader reader(path);
    FastaRecord rec;
    while (reader.next(rec)) seqs.push_back(std::move(rec.seq));
    if (seqs.empty()) throw DataError("no sequences in " + path.string());
    return seqs;
}

template <typename T, typename Parse>
std::vector<T> parse_csv_list(const std::string& arg, const char* what, Parse parse) {
    std::vector<T> out;
    std::size_t start = 0;
    while (start <= arg.size()) {
        std::size_t comma = arg.find(',', start);
        std::string tok = arg.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!tok.empty()) {
            try {
                out.push_back(parse(tok));
            } catch (const std::exception&) {
                throw ConfigError(std::string("bad ") + what + " value '" + tok + "'");
            }
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<int> parse_k_levels(const std::string& arg) {
    auto levels = parse_csv_list<int>(arg, "--k-levels", [](const std::string& t) { return std::stoi(t); });
    if (levels.empty()) throw ConfigError("empty --k-levels");
    return levels;
}

std::vector<double> parse_weights(const std::string& arg) {
    return parse_csv_list<double>(arg, "--weights", [](const std::string& t) { return std::stod(t); });
}

FilterPolicy make_filter(std::uint64_t min_count, std::int64_t max_count) {
    FilterPolicy p;
    p.min_count = min_count;
    if (max_count >= 0) p.max_count = static_cast<std::uint64_t>(max_count);
    p.validate();
    return p;
}

int run_gen(const fs::path& out, int taxa, std::size_t genome_len, std::uint64_t reads, int read_len,
            const std::string& weights_arg, std::uint64_t seed) {
    std::vector<double> weights = parse_weights(weights_arg);
    SynthSample s = make_synth_sample(seed, taxa, genome_len, weights, reads, read_len);
    fs::create_directories(out / "refs");
    for (std::size_t i = 0; i < s.taxa.size(); ++i)
        write_fasta(out / "refs" / ("tax" + std::to_string(s.taxa[i].value) + ".fasta"),
                    "tax" + std::to_string(s.taxa[i].value), s.genomes[i]);
    write_fastq(out / "sample.fastq", s.reads);

    nlohmann::ordered_json truth;
    truth["seed"] = seed;
    truth["genome_length"] = genome_len;
    truth["read_length"] = read_len;
    nlohmann::ordered_json taxa_json = nlohmann::ordered_json::array();
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < s.taxa.size(); ++i) {
        taxa_json.push_back(s.taxa[i].value);
        counts[std::to_string(s.taxa[i].value)] = s.true_counts[i];
    }
    truth["taxa"] = taxa_json;
    truth["true_counts"] = counts;
    std::ofstream os(out / "truth.json");
    os << truth.dump(2) << '\n';
    std::cout << "wrote " << (out / "sample.fastq").string() << " and " << s.taxa.size() << " references\n";
    return 0;
}

int run_build_db(const std::vector<std::string>& refs, int k, const fs::path& out) {
    std::vector<std::string> seqs;
    for (const auto& arg : refs) {
        TaxRef ref = parse_tax_ref(arg);
        auto records = read_fasta_records(ref.path);
        seqs.insert(seqs.end(), records.begin(), records.end());
    }
    KmerDatabase db = build_kmer_db(seqs, k);
    save_kmer_db(db, out);
    std::cout << "wrote " << out.string() << ": " << db.count() << " k-mers (k=" << k << ")\n";
    return 0;
}

int run_build_kss(const std::vector<std::string>& refs, const std::string& k_levels_arg, std::size_t sketch_size,
                  const fs::path& out) {
    std::vector<int> levels = parse_k_levels(k_levels_arg);
    PerTaxonSketches sketches;
    for (const auto& arg : refs) {
        TaxRef ref = parse_tax_ref(arg);
        auto records = read_fasta_records(ref.path);
        sketches[ref.tax] = make_minhash_sketch(records, levels, sketch_size);
    }
    KssSketch kss = build_kss(sketches, levels);
    save_kss(kss, out);
    std::cout << "wrote " << out.string() << ": " << kss.top_table.size() << " top entries, "
              << kss.k_levels.size() << " levels\n";
    return 0;
}

int run_build_index(const std::vector<std::string>& refs, int k, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    for (const auto& arg : refs) {
        TaxRef ref = parse_tax_ref(arg);
        SpeciesIndex idx = build_species_index(read_fasta_records(ref.path), ref.tax, k);
        fs::path out = out_dir / ("tax" + std::to_string(ref.tax.value) + ".msix");
        save_species_index(idx, out);
        std::cout << "wrote " << out.string() << ": " << idx.entries.size() << " entries\n";
    }
    return 0;
}

int run_prep(const fs::path& sample, int k, int buckets, std::uint64_t min_count, std::int64_t max_count,
             std::uint64_t dram_budget, const fs::path& out) {
    fs::create_directories(out);
    BucketPlan plan = [&] {
        std::vector<PackedKmer> s;
        FastqReader reader(sample);
        FastqRecord rec;
        while (s.size() < kPlanSampleSize && reader.next(rec))
            for_each_valid_kmer(rec.seq, k, [&](PackedKmer km) {
                if (s.size() < kPlanSampleSize) s.push_back(km);
            });
        if (s.empty()) throw DataError("no k-mers in sample " + sample.string());
        return plan_buckets(s, buckets);
    }();

    FastqReader reader(sample);
    FastqRecord rec;
    auto source = [&](std::string& seq) {
        if (!reader.next(rec)) return false;
        seq = rec.seq;
        return true;
    };
    ExtractOptions opts;
    opts.spill_dir = out / "spill";
    ExtractResult res = extract(source, k, plan, dram_budget, opts);

    FilterPolicy policy = make_filter(min_count, max_count);
    std::uint64_t kept = 0;
    for (std::size_t i = 0; i < res.buckets.size(); ++i) {
        auto counts = sort_and_count(res.buckets[i]);
        auto filtered = filter(counts, policy);
        kept += filtered.size();
        write_bucket_file(out / ("bucket" + std::to_string(i) + ".msbk"), k, filtered, true);
    }

    nlohmann::ordered_json j;
    j["sample"] = sample.string();
    j["k"] = k;
    j["buckets"] = res.buckets.size();
    j["extracted_kmers"] = res.total_kmers;
    j["filtered_kmers"] = kept;
    std::uint64_t ssd_pinned = 0;
    for (const auto& b : res.buckets)
        if (b.location == Pin::Ssd) ++ssd_pinned;
    j["ssd_pinned_buckets"] = ssd_pinned;
    std::ofstream os(out / "prep.json");
    os << j.dump(2) << '\n';
    std::cout << "extracted " << res.total_kmers << " k-mers into " << res.buckets.size() << " buckets ("
              << kept << " kept after filtering)\n";
    return 0;
}

RunPlan make_run_plan(const std::vector<fs::path>& samples, const fs::path& db, const fs::path& kss, int k,
                      int buckets, std::uint64_t min_count, std::int64_t max_count, double theta,
                      const std::string& mode, const fs::path& ssd_json, const std::string& power_json,
                      std::uint64_t dram_budget, int buffered, bool per_query) {
    RunPlan plan;
    plan.samples = samples;
    plan.db_path = db;
    plan.kss_path = kss;
    plan.k = k;
    plan.bucket_target = buckets;
    plan.filter_policy = make_filter(min_count, max_count);
    plan.theta = theta;
    plan.mode = parse_sim_mode(mode);
    plan.ssd = load_ssd_config(ssd_json);
    if (!power_json.empty()) plan.power = load_power_model(power_json);
    plan.host_dram_budget = dram_budget;
    plan.samples_buffered = buffered;
    plan.per_query_hits = per_query;
    return plan;
}

void print_run_summary(const ClassifyResult& result) {
    std::set<TaxId> present;
    for (const auto& s : result.samples)
        for (TaxId t : s.presence) present.insert(t);
    std::cout << "present taxa:";
    for (TaxId t : present) std::cout << ' ' << t.value;
    std::cout << "\nsimulated total: " << result.timeline.total << " s\n";
}

int run_classify_cmd(const RunPlan& plan, const fs::path& out) {
    ClassifyResult result = run_classify(plan);
    write_reports(out, result, plan);
    print_run_summary(result);
    return 0;
}

int run_abundance_cmd(RunPlan plan, const std::vector<std::string>& index_args, const fs::path& index_dir,
                      const fs::path& out) {
    if (!index_dir.empty()) {
        if (!fs::is_directory(index_dir)) throw IoError("not a directory: " + index_dir.string());
        std::vector<fs::path> found;
        for (const auto& entry : fs::directory_iterator(index_dir))
            if (entry.path().extension() == ".msix") found.push_back(entry.path());
        std::sort(found.begin(), found.end());
        plan.index_paths.insert(plan.index_paths.end(), found.begin(), found.end());
    }
    for (const auto& arg : index_args) plan.index_paths.emplace_back(arg);
    if (plan.index_paths.empty()) throw ConfigError("abundance needs --index or --index-dir");

    ClassifyResult result = run_classify(plan);
    std::set<TaxId> present;
    for (const auto& s : result.samples)
        for (TaxId t : s.presence) present.insert(t);
    UnifiedIndex unified;
    AbundanceReport report = run_abundance(plan, present, &unified);
    write_reports(out, result, plan, &report);
    save_unified_index(unified, out / "unified.msux"); // mapper hand-off
    print_run_summary(result);
    std::cout << "classified " << (report.total_reads - report.unclassified) << "/" << report.total_reads
              << " reads\n";
    return 0;
}

int run_simulate_cmd(const fs::path& ssd_json, const std::string& power_json, const std::string& mode_arg,
                     std::uint64_t db_bytes, int buckets, std::uint64_t raw_bytes, std::uint64_t query_bytes,
                     std::uint64_t intersection_bytes, std::uint64_t kss_bytes, int samples, const fs::path& out) {
    SsdConfig config = load_ssd_config(ssd_json);
    SimMode mode = parse_sim_mode(mode_arg);
    StagePlan plan;
    plan.db_bytes = db_bytes;
    auto per_bucket = [&](std::uint64_t total) {
        std::vector<std::uint64_t> v(static_cast<std::size_t>(buckets), total / static_cast<std::uint64_t>(buckets));
        v.back() += total - (total / static_cast<std::uint64_t>(buckets)) * static_cast<std::uint64_t>(buckets);
        return v;
    };
    plan.bucket_raw_bytes = per_bucket(raw_bytes * static_cast<std::uint64_t>(samples));
    plan.bucket_query_bytes = per_bucket(query_bytes * static_cast<std::uint64_t>(samples));
    plan.intersection_bytes = intersection_bytes * static_cast<std::uint64_t>(samples);
    plan.kss_bytes = kss_bytes;
    Timeline tl = simulate(plan, config, mode);
    if (!power_json.empty()) tl.energy_joules = energy(tl, resolve_power(load_power_model(power_json), config));

    fs::create_directories(out);
    write_timeline_csv(out / "timeline.csv", tl);
    nlohmann::ordered_json j;
    j["mode"] = to_string(mode);
    j["ssd"] = config.name;
    j["samples"] = samples;
    j["total_seconds"] = tl.total;
    j["energy_joules"] = tl.energy_joules;
    j["taxid_phases"] = tl.taxid_phases;
    j["stages"] = {{"input_processing",
                    tl.stage_total("spill") + tl.stage_total("sort") + tl.stage_total("transfer")},
                   {"intersection_finding", tl.stage_total("intersect")},
                   {"taxid_retrieval", tl.stage_total("taxid")}};
    std::ofstream os(out / "summary.json");
    os << j.dump(2) << '\n';
    std::cout << "simulated " << to_string(mode) << " on " << config.name << ": " << tl.total << " s\n";
    return 0;
}

int run_report_cmd(const fs::path& out) {
    fs::path summary = out / "summary.json";
    if (!fs::exists(summary)) throw IoError("no summary.json under " + out.string());
    std::cout << read_file(summary);
    for (const char* name : {"presence.csv", "hits.csv", "timeline.csv", "abundance.csv"}) {
        if (fs::exists(out / name)) std::cout << "report: " << (out / name).string() << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"metastore: in-storage metagenomic analysis pipeline and SSD model"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate synthetic genomes and a ground-truth sample");
    fs::path gen_out = "synth";
    int gen_taxa = 5;
    std::size_t gen_genome_len = 10000;
    std::uint64_t gen_reads = 5000;
    int gen_read_len = 150;
    std::string gen_weights = "0.5,0.3,0.2";
    std::uint64_t gen_seed = 1;
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--taxa", gen_taxa, "number of reference taxa");
    gen->add_option("--genome-len", gen_genome_len, "genome length in bases");
    gen->add_option("--reads", gen_reads, "number of reads");
    gen->add_option("--read-len", gen_read_len, "read length");
    gen->add_option("--weights", gen_weights, "comma-separated mixture weights (unlisted taxa are decoys)");
    gen->add_option("--seed", gen_seed, "RNG seed");

    // build-db
    auto* bdb = app.add_subcommand("build-db", "build the sorted k-mer database");
    std::vector<std::string> bdb_refs;
    int bdb_k = 60;
    fs::path bdb_out = "db.mskd";
    bdb->add_option("--ref", bdb_refs, "reference as TAXID=FASTA (repeatable)")->required();
    bdb->add_option("--k", bdb_k, "k-mer length (k_max)");
    bdb->add_option("--out", bdb_out, "output MSKD file");

    // build-kss
    auto* bkss = app.add_subcommand("build-kss", "build the k-mer sketch streaming structure");
    std::vector<std::string> bkss_refs;
    std::string bkss_levels = "60,50,40";
    std::size_t bkss_sketch = 64;
    fs::path bkss_out = "sketch.msks";
    bkss->add_option("--ref", bkss_refs, "reference as TAXID=FASTA (repeatable)")->required();
    bkss->add_option("--k-levels", bkss_levels, "strictly decreasing k levels, k_max first");
    bkss->add_option("--sketch-size", bkss_sketch, "bottom-s MinHash size per taxon");
    bkss->add_option("--out", bkss_out, "output MSKS file");

    // build-index
    auto* bidx = app.add_subcommand("build-index", "build per-species sorted location indexes");
    std::vector<std::string> bidx_refs;
    int bidx_k = 60;
    fs::path bidx_out = "indexes";
    bidx->add_option("--ref", bidx_refs, "reference as TAXID=FASTA (repeatable)")->required();
    bidx->add_option("--k", bidx_k, "k-mer length");
    bidx->add_option("--out-dir", bidx_out, "output directory for .msix files");

    // prep
    auto* prep = app.add_subcommand("prep", "host-side step 1: extract, bucket, sort, count, filter");
    fs::path prep_sample;
    int prep_k = 60, prep_buckets = 512;
    std::uint64_t prep_min = 2;
    std::int64_t prep_max = -1;
    std::uint64_t prep_budget = 8ull << 30;
    fs::path prep_out = "prep";
    prep->add_option("--sample", prep_sample, "FASTQ sample (plain or gzip)")->required();
    prep->add_option("--k", prep_k, "k-mer length");
    prep->add_option("--buckets", prep_buckets, "bucket target count");
    prep->add_option("--min-count", prep_min, "keep k-mers with count >= min");
    prep->add_option("--max-count", prep_max, "keep k-mers with count <= max (-1 = unlimited)");
    prep->add_option("--dram-budget", prep_budget, "host DRAM budget in bytes");
    prep->add_option("--out", prep_out, "output directory");

    // shared classify/abundance options
    auto add_run_options = [](CLI::App* cmd, std::vector<fs::path>& samples, fs::path& db, fs::path& kss, int& k,
                              int& buckets, std::uint64_t& min_count, std::int64_t& max_count, double& theta,
                              std::string& mode, fs::path& ssd, std::string& power, std::uint64_t& budget,
                              int& buffered, bool& per_query, fs::path& out) {
        cmd->add_option("--sample", samples, "FASTQ sample (repeatable)")->required();
        cmd->add_option("--db", db, "MSKD database")->required();
        cmd->add_option("--kss", kss, "MSKS sketch structure")->required();
        cmd->add_option("--k", k, "k-mer length (k_max)");
        cmd->add_option("--buckets", buckets, "bucket target count");
        cmd->add_option("--min-count", min_count, "filter: minimum multiplicity");
        cmd->add_option("--max-count", max_count, "filter: maximum multiplicity (-1 = unlimited)");
        cmd->add_option("--theta", theta, "presence containment threshold");
        cmd->add_option("--mode", mode, "ms|ms-nol|ext-ms|ms-cc");
        cmd->add_option("--ssd", ssd, "SSD config JSON")->required();
        cmd->add_option("--power", power, "power model JSON (optional)");
        cmd->add_option("--dram-budget", budget, "host DRAM budget in bytes");
        cmd->add_option("--samples", buffered, "samples buffered per database pass");
        cmd->add_flag("--per-query", per_query, "count prefix hits per query k-mer instead of per distinct prefix");
        cmd->add_option("--out", out, "output directory")->required();
    };

    auto* classify = app.add_subcommand("classify", "steps 1+2: presence/absence identification");
    std::vector<fs::path> cls_samples;
    fs::path cls_db, cls_kss, cls_ssd, cls_out;
    int cls_k = 60, cls_buckets = 512, cls_buffered = 1;
    std::uint64_t cls_min = 2, cls_budget = 8ull << 30;
    std::int64_t cls_max = -1;
    double cls_theta = 0.25;
    std::string cls_mode = "ms", cls_power;
    bool cls_per_query = false;
    add_run_options(classify, cls_samples, cls_db, cls_kss, cls_k, cls_buckets, cls_min, cls_max, cls_theta,
                    cls_mode, cls_ssd, cls_power, cls_budget, cls_buffered, cls_per_query, cls_out);

    auto* abundance = app.add_subcommand("abundance", "steps 1+2+3: classification plus abundance estimation");
    std::vector<fs::path> ab_samples;
    fs::path ab_db, ab_kss, ab_ssd, ab_out, ab_index_dir;
    std::vector<std::string> ab_indexes;
    int ab_k = 60, ab_buckets = 512, ab_buffered = 1;
    std::uint64_t ab_min = 2, ab_budget = 8ull << 30;
    std::int64_t ab_max = -1;
    double ab_theta = 0.25;
    std::string ab_mode = "ms", ab_power;
    bool ab_per_query = false;
    add_run_options(abundance, ab_samples, ab_db, ab_kss, ab_k, ab_buckets, ab_min, ab_max, ab_theta, ab_mode,
                    ab_ssd, ab_power, ab_budget, ab_buffered, ab_per_query, ab_out);
    abundance->add_option("--index", ab_indexes, "species index .msix (repeatable)");
    abundance->add_option("--index-dir", ab_index_dir, "directory of .msix indexes");

    // simulate
    auto* sim = app.add_subcommand("simulate", "run the SSD timing model on explicit byte volumes");
    fs::path sim_ssd, sim_out = "sim";
    std::string sim_power, sim_mode = "ms";
    std::uint64_t sim_db = 9'600'000'000ull, sim_raw = 1ull << 30, sim_query = 256ull << 20;
    std::uint64_t sim_inter = 64ull << 20, sim_kss = 256ull << 20;
    int sim_buckets = 8, sim_samples = 1;
    sim->add_option("--ssd", sim_ssd, "SSD config JSON")->required();
    sim->add_option("--power", sim_power, "power model JSON (optional)");
    sim->add_option("--mode", sim_mode, "ms|ms-nol|ext-ms|ms-cc");
    sim->add_option("--db-bytes", sim_db, "database bytes streamed");
    sim->add_option("--buckets", sim_buckets, "bucket count");
    sim->add_option("--raw-bytes", sim_raw, "extracted k-mer bytes per sample");
    sim->add_option("--query-bytes", sim_query, "filtered query bytes per sample");
    sim->add_option("--intersection-bytes", sim_inter, "intersection bytes per sample");
    sim->add_option("--kss-bytes", sim_kss, "KSS bytes streamed per tax-ID pass");
    sim->add_option("--samples", sim_samples, "buffered samples sharing the database stream");
    sim->add_option("--out", sim_out, "output directory");

    // report
    auto* rep = app.add_subcommand("report", "print the summary of a finished run directory");
    fs::path rep_out;
    rep->add_option("--out", rep_out, "run output directory")->required();

    try {
        app.parse(argc, argv);
        if (gen->parsed())
            return run_gen(gen_out, gen_taxa, gen_genome_len, gen_reads, gen_read_len, gen_weights, gen_seed);
        if (bdb->parsed()) return run_build_db(bdb_refs, bdb_k, bdb_out);
        if (bkss->parsed()) return run_build_kss(bkss_refs, bkss_levels, bkss_sketch, bkss_out);
        if (bidx->parsed()) return run_build_index(bidx_refs, bidx_k, bidx_out);
        if (prep->parsed()) return run_prep(prep_sample, prep_k, prep_buckets, prep_min, prep_max, prep_budget,
                                            prep_out);
        if (classify->parsed()) {
            RunPlan plan = make_run_plan(cls_samples, cls_db, cls_kss, cls_k, cls_buckets, cls_min, cls_max,
                                         cls_theta, cls_mode, cls_ssd, cls_power, cls_budget, cls_buffered,
                                         cls_per_query);
            return run_classify_cmd(plan, cls_out);
        }
        if (abundance->parsed()) {
            RunPlan plan = make_run_plan(ab_samples, ab_db, ab_kss, ab_k, ab_buckets, ab_min, ab_max, ab_theta,
                                         ab_mode, ab_ssd, ab_power, ab_budget, ab_buffered, ab_per_query);
            return run_abundance_cmd(std::move(plan), ab_indexes, ab_index_dir, ab_out);
        }
        if (sim->parsed())
            return run_simulate_cmd(sim_ssd, sim_power, sim_mode, sim_db, sim_buckets, sim_raw, sim_query,
                                    sim_inter, sim_kss, sim_samples, sim_out);
        if (rep->parsed()) return run_report_cmd(rep_out);
        return 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const RangeError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const CapacityError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 4;
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
