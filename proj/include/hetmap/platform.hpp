#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hetmap/common.hpp"

namespace hetmap {

struct MemoryUnit {
    std::string id;
    // Either an explicit rate or (bus_clock, bus_width, channels).
    double explicit_rate = 0.0; // bytes/s, used when > 0
    double bus_clock = 0.0;     // Hz
    double bus_width = 0.0;     // bytes
    double channels = 0.0;
    bool is_virtual = false;
    std::string owner; // owning proc unit for virtual memories

    bool operator==(const MemoryUnit&) const = default;
};

struct ProcUnit {
    std::string id;
    double clock = 0.0;            // Hz
    double overhead_penalty = 1.0; // (0,1]
    double cores = 1.0;
    double data_parallelism = 1.0; // SIMD width factor
    bool dataflow = false;
    double area_capacity = 0.0; // S_p, meaningful for dataflow units

    bool operator==(const ProcUnit&) const = default;
};

struct Link {
    std::string a, b;          // memory ids, unordered
    double rate_limit = kInf;  // bytes/s

    bool operator==(const Link&) const = default;
};

struct Platform {
    std::vector<ProcUnit> procs;
    std::vector<MemoryUnit> memories;
    // proc id -> associated memory ids (every proc has at least one)
    std::vector<std::pair<std::string, std::vector<std::string>>> assoc;
    std::vector<Link> links;

    const ProcUnit* find_proc(const std::string& id) const;
    const MemoryUnit* find_mem(const std::string& id) const;
    bool has_unit(const std::string& id) const;
    const std::vector<std::string>* assoc_of(const std::string& proc_id) const;

    // Link lookup for a memory pair; same id -> limit kInf (no constraint),
    // missing link -> nullopt.
    std::optional<double> link_limit(const std::string& a,
                                     const std::string& b) const;

    // All unit ids, procs first then memories, in declaration order.
    std::vector<std::string> unit_ids() const;

    bool operator==(const Platform&) const = default;
};

double memory_rate(const MemoryUnit& mem);
std::pair<double, double> proc_rates(const ProcUnit& dev); // (r_s, r_p)

// Hardware presets: CG = CPU+GPU, CGF adds one FPGA, CGFF adds a second one.
Platform preset(const std::string& name);

// Adds a fresh virtual memory owned by `owner`; returns its id.
std::string add_virtual_memory(Platform& pf, const std::string& owner);

std::vector<std::string> validate_platform(const Platform& pf);

} // namespace hetmap
