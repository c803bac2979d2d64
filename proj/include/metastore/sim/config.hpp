#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "metastore/core/bytes.hpp"
#include "metastore/core/errors.hpp"

namespace metastore {

/// Device geometry, bandwidths (bytes/s) and compute throughputs (k-mers/s).
struct SsdConfig {
    std::string name = "ssd";
    int channels = 8;
    int dies_per_channel = 4;
    int planes_per_die = 2;
    std::uint64_t page_bytes = 16384;
    std::uint64_t block_bytes = 12ull << 20;
    std::uint64_t capacity_bytes = 4ull << 40;
    double per_channel_bw = 1.2e9;
    double external_bw = 5.6e8;
    std::uint64_t internal_dram_bytes = 4ull << 30;
    double internal_dram_bw = 8.5e9;
    double comparator_rate = 3.0e8;      // per channel
    double controller_core_rate = 5.5e8; // whole controller (MS-CC mode)
    double host_sort_rate = 4.0e8;       // bytes/s
    double accel_freq = 3.0e8;           // Hz

    double internal_bw() const { return channels * per_channel_bw; }

    /// One double-buffered query batch: one page per plane across the device.
    std::uint64_t batch_bytes() const {
        return static_cast<std::uint64_t>(channels) * static_cast<std::uint64_t>(dies_per_channel) *
               static_cast<std::uint64_t>(planes_per_die) * page_bytes;
    }

    void validate() const {
        auto positive = [](double v, const char* what) {
            if (!(v > 0)) throw ConfigError(std::string("SSD config field must be positive: ") + what);
        };
        positive(channels, "channels");
        positive(dies_per_channel, "dies_per_channel");
        positive(planes_per_die, "planes_per_die");
        positive(static_cast<double>(page_bytes), "page_bytes");
        positive(static_cast<double>(block_bytes), "block_bytes");
        positive(static_cast<double>(capacity_bytes), "capacity_bytes");
        positive(per_channel_bw, "per_channel_bw");
        positive(external_bw, "external_bw");
        positive(static_cast<double>(internal_dram_bytes), "internal_dram_bytes");
        positive(internal_dram_bw, "internal_dram_bw");
        positive(comparator_rate, "comparator_rate");
        positive(controller_core_rate, "controller_core_rate");
        positive(host_sort_rate, "host_sort_rate");
        positive(accel_freq, "accel_freq");
    }
};

struct PowerEntry {
    double active_w = 0;
    double idle_w = 0;
};

/// Active/idle powers. Only the accelerator numbers are hardware-derived;
/// the rest ship as placeholders meant to be calibrated per system.
struct PowerModel {
    PowerEntry nand_per_channel;
    PowerEntry internal_dram;
    PowerEntry accelerator; // device total
    PowerEntry controller_cores;
    PowerEntry host_cpu;
    PowerEntry external_link;

    void validate() const {
        for (const PowerEntry* e :
             {&nand_per_channel, &internal_dram, &accelerator, &controller_cores, &host_cpu, &external_link}) {
            if (e->idle_w < 0 || e->active_w < e->idle_w)
                throw ConfigError("power entries require active_w >= idle_w >= 0");
        }
    }
};

inline void from_json(const nlohmann::json& j, SsdConfig& c) {
    c.name = j.value("name", std::string("ssd"));
    j.at("channels").get_to(c.channels);
    j.at("dies_per_channel").get_to(c.dies_per_channel);
    j.at("planes_per_die").get_to(c.planes_per_die);
    j.at("page_bytes").get_to(c.page_bytes);
    j.at("block_bytes").get_to(c.block_bytes);
    j.at("capacity_bytes").get_to(c.capacity_bytes);
    j.at("per_channel_bw").get_to(c.per_channel_bw);
    j.at("external_bw").get_to(c.external_bw);
    j.at("internal_dram_bytes").get_to(c.internal_dram_bytes);
    j.at("internal_dram_bw").get_to(c.internal_dram_bw);
    j.at("comparator_rate").get_to(c.comparator_rate);
    j.at("controller_core_rate").get_to(c.controller_core_rate);
    j.at("host_sort_rate").get_to(c.host_sort_rate);
    j.at("accel_freq").get_to(c.accel_freq);
}

inline void to_json(nlohmann::json& j, const SsdConfig& c) {
    j = nlohmann::json{{"name", c.name},
                       {"channels", c.channels},
                       {"dies_per_channel", c.dies_per_channel},
                       {"planes_per_die", c.planes_per_die},
                       {"page_bytes", c.page_bytes},
                       {"block_bytes", c.block_bytes},
                       {"capacity_bytes", c.capacity_bytes},
                       {"per_channel_bw", c.per_channel_bw},
                       {"external_bw", c.external_bw},
                       {"internal_dram_bytes", c.internal_dram_bytes},
                       {"internal_dram_bw", c.internal_dram_bw},
                       {"comparator_rate", c.comparator_rate},
                       {"controller_core_rate", c.controller_core_rate},
                       {"host_sort_rate", c.host_sort_rate},
                       {"accel_freq", c.accel_freq}};
}

inline void from_json(const nlohmann::json& j, PowerEntry& e) {
    j.at("active_w").get_to(e.active_w);
    j.at("idle_w").get_to(e.idle_w);
}

inline void from_json(const nlohmann::json& j, PowerModel& m) {
    j.at("nand_per_channel").get_to(m.nand_per_channel);
    j.at("internal_dram").get_to(m.internal_dram);
    j.at("accelerator").get_to(m.accelerator);
    j.at("controller_cores").get_to(m.controller_cores);
    j.at("host_cpu").get_to(m.host_cpu);
    j.at("external_link").get_to(m.external_link);
}

inline SsdConfig load_ssd_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad SSD config " + path.string() + ": " + e.what());
    }
    SsdConfig c;
    try {
        j.get_to(c);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad SSD config " + path.string() + ": " + e.what());
    }
    c.validate();
    return c;
}

inline PowerModel load_power_model(const std::filesystem::path& path) {
    PowerModel m;
    try {
        nlohmann::json::parse(read_file(path)).get_to(m);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad power model " + path.string() + ": " + e.what());
    }
    m.validate();
    return m;
}

} // namespace metastore
