#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include "metastore/core/errors.hpp"
#include "metastore/core/kmer.hpp"

namespace metastore {

/// Little-endian append-only byte buffer. All file formats are built from
/// these fixed-width writes, so serialization is byte-identical across runs.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void u128(Uint128 v) {
        for (int i = 0; i < 16; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void raw(std::string_view s) { buf_.append(s); }

    const std::string& str() const { return buf_; }
    std::string take() { return std::move(buf_); }
    std::size_t size() const { return buf_.size(); }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    std::string buf_;
};

/// Cursor over a byte string; throws ParseError on truncation.
class ByteReader {
public:
    explicit ByteReader(std::string_view data) : data_(data) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    Uint128 u128() {
        Uint128 v = 0;
        need(16);
        for (int i = 0; i < 16; ++i)
            v |= Uint128{static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)])} << (8 * i);
        pos_ += 16;
        return v;
    }
    std::string_view raw(std::size_t n) {
        need(n);
        std::string_view s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool at_end() const { return pos_ == data_.size(); }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    std::uint64_t get(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    void need(std::size_t n) const {
        if (pos_ + n > data_.size()) throw ParseError("truncated input: need " + std::to_string(n) + " bytes");
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

inline void write_file(const std::filesystem::path& path, std::string_view data) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!os) throw IoError("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());
    std::string data((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (is.bad()) throw IoError("read failed: " + path.string());
    return data;
}

} // namespace metastore
