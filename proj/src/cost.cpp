#include "pimorch/cost.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pimorch/errors.hpp"

namespace pimorch {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

std::int64_t ceil_cycles(double x) {
    if (x <= 0) return 0;
    // Guard against 4992/8 landing a hair above 624 through rounding.
    const double r = std::round(x);
    if (std::abs(x - r) < 1e-9 * std::max(1.0, r)) return static_cast<std::int64_t>(r);
    return static_cast<std::int64_t>(std::ceil(x));
}

}  // namespace

std::string_view to_string(UtilizationModel m) {
    return m == UtilizationModel::ideal ? "ideal" : "fill_drain";
}

UtilizationModel parse_utilization_model(std::string_view s) {
    if (s == "ideal") return UtilizationModel::ideal;
    if (s == "fill_drain") return UtilizationModel::fill_drain;
    throw ConfigError("unknown cost model '" + std::string(s) + "'");
}

CostParams CostParams::from(const ArchSpec& arch, int bytes_per_element, UtilizationModel model) {
    CostParams p;
    p.pe = arch.pe_size;
    p.local_bw = arch.local_bw;
    p.link_bw = arch.link_bw;
    p.acu = arch.acu;
    p.e_noc = arch.e_noc;
    p.e_mem = arch.e_mem;
    p.e_mac = arch.e_mac;
    p.bytes_per_element = bytes_per_element;
    p.model = model;
    return p;
}

std::int64_t gemm_compute_cycles(const GemmDims& dims, const CostParams& params) {
    const std::int64_t r = params.pe;
    const std::int64_t tiles = ceil_div(dims.m, r) * ceil_div(dims.n, r);
    std::int64_t cycles = tiles * dims.k;
    if (params.model == UtilizationModel::fill_drain) cycles += tiles * (r - 1);
    return cycles;
}

std::int64_t gemm_cycles(const GemmDims& dims, const CostParams& params) {
    const std::int64_t bytes =
        (dims.m * dims.k + dims.k * dims.n + dims.m * dims.n) * params.bytes_per_element;
    const std::int64_t memory = ceil_cycles(static_cast<double>(bytes) / params.local_bw);
    return std::max(gemm_compute_cycles(dims, params), memory);
}

std::int64_t acu_cycles(const PhaseDescriptor& phase, const CostParams& params) {
    double per_unit = 0;
    switch (phase.acu) {
        case AcuOp::none: return 0;
        case AcuOp::softmax_row: per_unit = params.acu.softmax_row; break;
        case AcuOp::layernorm_row: per_unit = params.acu.layernorm_row; break;
        case AcuOp::gelu_elem: per_unit = params.acu.gelu_elem; break;
        default: throw ConfigError("unknown ACU operation");
    }
    return phase.repeat * ceil_cycles(static_cast<double>(phase.acu_units) * per_unit);
}

std::int64_t transfer_cycles(double bytes, const CostParams& params) {
    return ceil_cycles(bytes / params.link_bw);
}

EnergyBreakdown energy(const EnergyInputs& in, const CostParams& params) {
    EnergyBreakdown e;
    e.noc_pj = in.noc_bit_hops * params.e_noc;
    e.mem_pj = in.mem_bits * params.e_mem;
    e.mac_pj = in.macs * params.e_mac;
    return e;
}

PhaseCost phase_cost(const PhaseDescriptor& phase, const CostParams& params) {
    PhaseCost c;
    if (phase.gemm) c.compute += phase.repeat * gemm_cycles(*phase.gemm, params);
    c.compute += acu_cycles(phase, params);
    c.transfer = transfer_cycles(static_cast<double>(phase.transfer_bytes), params);
    c.weight_share = transfer_cycles(phase.weight_share_bytes, params);
    return c;
}

LayerCost layer_cost(const Candidate& c, int blocks, const CostParams& params, bool sharing) {
    LayerCost out;
    for (const auto& ph : phase_plan(c)) {
        const PhaseCost pc = phase_cost(ph, params);
        out.compute += blocks * pc.compute;
        out.transfer += blocks * pc.transfer;
        if (sharing) out.weight_share += blocks * pc.weight_share;
    }
    if (auto pm = patch_merge_phase(c)) {
        const PhaseCost pc = phase_cost(*pm, params);
        out.compute += pc.compute;
        out.transfer += pc.transfer;
        if (sharing) out.weight_share += pc.weight_share;
    }
    return out;
}

std::int64_t phase_memory_bytes(const PhaseDescriptor& phase, int bytes_per_element) {
    std::int64_t bytes = 0;
    if (phase.gemm) {
        const auto& g = *phase.gemm;
        bytes += phase.repeat * (g.m * g.k + g.k * g.n + g.m * g.n) * bytes_per_element;
    }
    if (phase.acu != AcuOp::none) {
        // Read and write back every row/element once.
        bytes += phase.repeat * 2 * phase.acu_units * bytes_per_element;
    }
    return bytes;
}

}  // namespace pimorch
