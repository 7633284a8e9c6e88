/**
 * @file cost.hpp
 * @brief Analytic timing and energy model for one PIM node.
 *
 * GeMM time is a roofline over an r x r PE array and the local memory bandwidth,
 * nonlinear ops run on the ACU at a configured per-row/per-element latency, and
 * cyclic-dataflow transfers move over contention-free single-hop links.
 */
#pragma once

#include <cstdint>
#include <string_view>

#include "pimorch/arch.hpp"
#include "pimorch/model.hpp"
#include "pimorch/partition.hpp"

namespace pimorch {

enum class UtilizationModel { ideal, fill_drain };

std::string_view to_string(UtilizationModel m);
UtilizationModel parse_utilization_model(std::string_view s);

struct CostParams {
    int pe = 1;
    double local_bw = 1;  ///< bytes/cycle
    double link_bw = 1;   ///< bytes/cycle
    AcuLatency acu;
    double e_noc = 0;
    double e_mem = 0;
    double e_mac = 0;
    int bytes_per_element = 1;
    UtilizationModel model = UtilizationModel::ideal;

    static CostParams from(const ArchSpec& arch, int bytes_per_element,
                           UtilizationModel model = UtilizationModel::ideal);
};

/// PE-array term only: ceil(m/r) ceil(n/r) k, plus (r-1) per output tile for fill_drain.
std::int64_t gemm_compute_cycles(const GemmDims& dims, const CostParams& params);

/// Roofline: max of the compute term and bytes touched / local bandwidth.
std::int64_t gemm_cycles(const GemmDims& dims, const CostParams& params);

/// ACU time of one phase, covering all `repeat` repetitions. Zero for phases without ACU work.
std::int64_t acu_cycles(const PhaseDescriptor& phase, const CostParams& params);

/// ceil(bytes / BW).
std::int64_t transfer_cycles(double bytes, const CostParams& params);

struct EnergyInputs {
    double noc_bit_hops = 0;
    double mem_bits = 0;
    double macs = 0;
};

struct EnergyBreakdown {
    double noc_pj = 0;
    double mem_pj = 0;
    double mac_pj = 0;

    double total_pj() const { return noc_pj + mem_pj + mac_pj; }
};

EnergyBreakdown energy(const EnergyInputs& in, const CostParams& params);

/// Cycle cost of one phase on one node (one batch element for compute/transfer).
struct PhaseCost {
    std::int64_t compute = 0;   ///< GeMM + ACU
    std::int64_t transfer = 0;  ///< pre-phase cyclic dataflow
    std::int64_t weight_share = 0;
};

PhaseCost phase_cost(const PhaseDescriptor& phase, const CostParams& params);

/// Per-layer cost terms of a candidate: T^c, T^t (per batch element) and T^ws.
struct LayerCost {
    std::int64_t compute = 0;
    std::int64_t transfer = 0;
    std::int64_t weight_share = 0;

    /// N^bt (T^c + T^t) + T^ws
    std::int64_t total(int batch) const { return batch * (compute + transfer) + weight_share; }
};

/// Costs one temporal layer running `blocks` encoders with this candidate. When
/// `sharing` is false every node stores its column's full weights and no weight
/// traffic is generated.
LayerCost layer_cost(const Candidate& c, int blocks, const CostParams& params, bool sharing);

/// Bytes touched in local memory by one node for one phase (all repetitions).
std::int64_t phase_memory_bytes(const PhaseDescriptor& phase, int bytes_per_element);

}  // namespace pimorch
