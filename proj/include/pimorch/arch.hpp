#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace pimorch {

/// Per-unit latency of the auxiliary computing unit, in cycles.
struct AcuLatency {
    double softmax_row = 16.0;
    double layernorm_row = 16.0;
    double gelu_elem = 0.125;

    bool operator==(const AcuLatency&) const = default;
};

/// Tiled PIM system. Bandwidths are stored in bytes/cycle.
struct ArchSpec {
    static constexpr int kSchemaVersion = 1;

    std::string name;
    int grid_h = 0;            ///< H_A
    int grid_w = 0;            ///< W_A
    int pe_size = 0;           ///< r, the PE array is r x r MACs
    std::int64_t node_cap = 0; ///< bytes per node memory submodule
    double local_bw = 0;       ///< bw, bytes/cycle
    int flit_bits = 0;
    double link_bw = 0;        ///< BW, bytes/cycle per link (flit_bits / 8)
    double clock_mhz = 0;
    double e_noc = 0;          ///< pJ/bit/hop
    double e_mem = 0;          ///< pJ/bit
    double e_mac = 0;          ///< pJ/MAC
    AcuLatency acu;
    int p_min = 0;             ///< minimum patch-chunk granularity

    int nodes() const { return grid_h * grid_w; }

    bool operator==(const ArchSpec&) const = default;
};

ArchSpec load_arch(std::string_view config_text);
ArchSpec load_arch_file(const std::string& path);
std::string dump_arch(const ArchSpec& a);
void validate(const ArchSpec& a);

}  // namespace pimorch
