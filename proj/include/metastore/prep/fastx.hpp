#pragma once

#include <filesystem>
#include <string>
#include <utility>

#include <zlib.h>

#include "metastore/core/errors.hpp"

namespace metastore {

namespace detail {

/// Line source over a gzFile. zlib's gz* layer reads plain files
/// transparently, so one reader covers both .fastq and .fastq.gz.
class GzLineReader {
public:
    explicit GzLineReader(const std::filesystem::path& path) {
        file_ = gzopen(path.string().c_str(), "rb");
        if (!file_) throw IoError("cannot open: " + path.string());
        gzbuffer(file_, 1 << 16);
    }
    ~GzLineReader() {
        if (file_) gzclose(file_);
    }
    GzLineReader(const GzLineReader&) = delete;
    GzLineReader& operator=(const GzLineReader&) = delete;
    GzLineReader(GzLineReader&& o) noexcept : file_(std::exchange(o.file_, nullptr)) {}

    /// Reads one line without the trailing newline (and without a trailing
    /// '\r'). Returns false at end of input.
    bool next_line(std::string& out) {
        out.clear();
        char chunk[4096];
        bool got = false;
        for (;;) {
            if (gzgets(file_, chunk, sizeof(chunk)) == nullptr) {
                int errnum = 0;
                const char* msg = gzerror(file_, &errnum);
                if (errnum != Z_OK && errnum != Z_STREAM_END) throw IoError(std::string("gz read error: ") + msg);
                return got;
            }
            got = true;
            out += chunk;
            if (!out.empty() && out.back() == '\n') {
                out.pop_back();
                if (!out.empty() && out.back() == '\r') out.pop_back();
                return true;
            }
        }
    }

private:
    gzFile file_ = nullptr;
};

} // namespace detail

struct FastqRecord {
    std::string name;
    std::string seq;
    std::string qual;
};

/// Streaming four-line FASTQ reader (plain or gzip).
class FastqReader {
public:
    explicit FastqReader(const std::filesystem::path& path) : lines_(path), path_(path.string()) {}

    /// Next record, or false at clean end of file. Throws ParseError with
    /// the 0-based record index for structurally broken records.
    bool next(FastqRecord& rec) {
        std::string header;
        if (!lines_.next_line(header)) return false;
        if (header.empty() || header[0] != '@') fail("header does not start with '@'");
        std::string plus;
        if (!lines_.next_line(rec.seq)) fail("truncated record (missing sequence)");
        if (!lines_.next_line(plus)) fail("truncated record (missing '+')");
        if (plus.empty() || plus[0] != '+') fail("separator line does not start with '+'");
        if (!lines_.next_line(rec.qual)) fail("truncated record (missing quality)");
        if (rec.qual.size() != rec.seq.size()) fail("quality length != sequence length");
        rec.name = header.substr(1);
        ++index_;
        return true;
    }

    std::uint64_t records_read() const { return index_; }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw ParseError("malformed FASTQ record " + std::to_string(index_) + " in " + path_ + ": " + why);
    }
    detail::GzLineReader lines_;
    std::string path_;
    std::uint64_t index_ = 0;
};

struct FastaRecord {
    std::string name;
    std::string seq;
};

/// Streaming FASTA reader (plain or gzip); sequence lines are concatenated.
class FastaReader {
public:
    explicit FastaReader(const std::filesystem::path& path) : lines_(path), path_(path.string()) {}

    bool next(FastaRecord& rec) {
        rec.name.clear();
        rec.seq.clear();
        if (pending_.empty()) {
            std::string line;
            for (;;) {
                if (!lines_.next_line(line)) return false;
                if (line.empty()) continue;
                if (line[0] != '>') throw ParseError("FASTA does not start with '>' in " + path_);
                pending_ = line;
                break;
            }
        }
        rec.name = pending_.substr(1);
        pending_.clear();
        std::string line;
        while (lines_.next_line(line)) {
            if (!line.empty() && line[0] == '>') {
                pending_ = line;
                break;
            }
            rec.seq += line;
        }
        return true;
    }

private:
    detail::GzLineReader lines_;
    std::string path_;
    std::string pending_;
};

} // namespace metastore
