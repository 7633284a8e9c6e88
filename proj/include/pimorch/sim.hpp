/**
 * @file sim.hpp
 * @brief Phase-by-phase execution of a placed schedule on the analytic cost
 * model, reports, and fixed-partition baselines.
 */
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pimorch/cost.hpp"
#include "pimorch/ilp.hpp"
#include "pimorch/placement.hpp"

namespace pimorch {

enum class EventKind { compute, transfer, weight_share, interaction };
std::string_view to_string(EventKind k);

struct Event {
    int stage = 0;
    int layer = -1;  ///< -1 for interaction
    int block = -1;  ///< -1 for patch merging and interaction
    PhaseId phase = PhaseId::patch_merge;
    EventKind kind = EventKind::compute;
    std::int64_t start = 0;
    std::int64_t duration = 0;
    int nodes = 0;  ///< PIM-nodes occupied by the layer
};

struct Timeline {
    std::vector<Event> events;
    std::int64_t end() const { return events.empty() ? 0 : events.back().start + events.back().duration; }
};

struct StageReport {
    int stage = 0;
    int layers = 0;
    std::int64_t cycles = 0;  ///< including interaction
    std::int64_t interaction_cycles = 0;
    double utilization = 0;
    double avg_hops = 0;
    double total_hop_bytes = 0;
};

struct CostReport {
    std::string label;
    std::string model;
    std::string arch;
    int batch = 1;
    double clock_mhz = 0;
    std::int64_t total_cycles = 0;
    std::int64_t compute_cycles = 0;
    std::int64_t transfer_cycles = 0;
    std::int64_t weight_share_cycles = 0;
    std::int64_t interaction_cycles = 0;
    double utilization = 0;
    std::vector<StageReport> stages;
    MemoryBreakdown memory;
    std::int64_t node_cap = 0;
    EnergyBreakdown energy;
    double noc_bytes = 0;
    double macs = 0;  ///< useful MACs of the scheduled layers
    std::int64_t ideal_cycles = 0;

    double total_ms() const { return clock_mhz > 0 ? total_cycles / (clock_mhz * 1e3) : 0.0; }
    bool memory_ok() const { return memory.total() <= static_cast<double>(node_cap); }
};

/// MACs of one inference (batch 1); depends on the model only.
double model_macs(const ModelSpec& model);

struct SimResult {
    Timeline timeline;
    CostReport report;
};

/// Throws ValidationError when schedule and placement disagree.
SimResult simulate(const IlpInstance& inst, const Schedule& schedule, const Placement& placement,
                   std::string label = "orchestrated");

struct Utilization {
    std::vector<double> per_stage;
    double overall = 0;
};

/// Occupied-node-time over grid-node-time across temporal layers.
Utilization node_utilization(const Timeline& timeline, const ArchSpec& arch, int stages);

enum class BaselineKind { branch, patch, head };
std::string_view to_string(BaselineKind k);  ///< "B", "P", "AH"
BaselineKind parse_baseline(std::string_view s);

/// Fixed-partition layer assignment: u = v = 1 (B), largest patch split (P) or
/// largest head split (AH), layers filled to the layout capacity.
std::vector<std::vector<LayerChoice>> baseline_layers(const IlpInstance& inst, BaselineKind kind);

struct BaselineRun {
    BaselineKind kind = BaselineKind::branch;
    Schedule schedule;
    Placement placement;
    SimResult result;
};

/// Memory is reported but not enforced for baselines.
BaselineRun run_baseline(const IlpInstance& inst, BaselineKind kind);

enum class ReportFormat { text, json, csv };
ReportFormat parse_report_format(std::string_view s);

std::string emit_report(const std::vector<CostReport>& reports, ReportFormat format);
std::vector<CostReport> reports_from_json(std::string_view text);

}  // namespace pimorch
