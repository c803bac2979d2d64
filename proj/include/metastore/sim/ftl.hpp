#pragma once

#include <cstdint>
#include <vector>

#include "metastore/core/errors.hpp"
#include "metastore/sim/config.hpp"

namespace metastore {

/// Physical placement of one page.
struct PagePlacement {
    int channel = 0;
    std::uint64_t block = 0;       // physical block address
    std::uint64_t page_offset = 0; // within the block
};

/// Compact L2P replacement used during ISP: a sequentially laid out
/// database needs only the start mapping, its size, and the ordered block
/// sequence. Pages are striped round-robin across channels and every active
/// block sits at the same page offset, so any page's physical location is a
/// pure function of these fields.
struct CompactMapping {
    std::uint64_t start_lpa = 0;
    std::uint64_t start_ppa = 0;
    std::uint64_t db_bytes = 0;
    std::vector<std::uint64_t> block_sequence;

    /// start LPA (8) + start PPA (8) + size (8).
    static constexpr std::uint64_t kHeaderBytes = 24;

    std::uint64_t l2p_bytes() const { return 4 * block_sequence.size() + kHeaderBytes; }
};

inline CompactMapping ftl_layout(std::uint64_t db_bytes, const SsdConfig& config) {
    config.validate();
    if (db_bytes > config.capacity_bytes)
        throw CapacityError("database of " + std::to_string(db_bytes) + " bytes exceeds device capacity of " +
                            std::to_string(config.capacity_bytes) + " bytes");
    CompactMapping m;
    m.db_bytes = db_bytes;
    const std::uint64_t blocks = (db_bytes + config.block_bytes - 1) / config.block_bytes;
    const std::uint64_t blocks_per_channel_cap = config.capacity_bytes / (static_cast<std::uint64_t>(config.channels) * config.block_bytes);
    m.block_sequence.reserve(blocks);
    for (std::uint64_t j = 0; j < blocks; ++j) {
        std::uint64_t channel = j % static_cast<std::uint64_t>(config.channels);
        std::uint64_t local = j / static_cast<std::uint64_t>(config.channels);
        m.block_sequence.push_back(channel * blocks_per_channel_cap + local);
    }
    return m;
}

/// Physical location of a logical page, derived from the compact fields
/// alone. Reads stripe round-robin across channels (page p on channel
/// p mod C); data fills the block sequence in order, one block's worth of
/// pages at a time, so a sequential scan just increments the page offset
/// and steps to the next block address when it wraps.
inline PagePlacement physical_page_of(const CompactMapping& m, const SsdConfig& config, std::uint64_t lpa) {
    const std::uint64_t o = lpa - m.start_lpa;
    const std::uint64_t channels = static_cast<std::uint64_t>(config.channels);
    const std::uint64_t pages_per_block = config.block_bytes / config.page_bytes;
    PagePlacement p;
    p.channel = static_cast<int>(o % channels);
    p.page_offset = o % pages_per_block;
    p.block = m.block_sequence.at(o / pages_per_block);
    return p;
}

/// Bytes of FTL metadata resident during ISP: the compact L2P plus one
/// 4-byte per-block access counter for read-disturbance management.
inline std::uint64_t metadata_budget(const CompactMapping& m, const SsdConfig& config) {
    (void)config;
    return m.l2p_bytes() + 4 * m.block_sequence.size();
}

/// Regular page-granularity FTL for comparison: 4 bytes of L2P for every
/// 4 KiB page (the 0.1% overhead baseline).
inline std::uint64_t regular_l2p_bytes(std::uint64_t db_bytes) {
    return 4 * ((db_bytes + 4095) / 4096);
}

} // namespace metastore
