/**
 * @file placement.hpp
 * @brief Branch dependency graphs and binding of branches to sub-arrays.
 */
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pimorch/arch.hpp"
#include "pimorch/ilp.hpp"
#include "pimorch/layout.hpp"
#include "pimorch/model.hpp"

namespace pimorch {

struct DependencyEdge {
    int a = 0;
    int b = 0;
    double volume = 0;  ///< bytes exchanged per interaction event
};

struct DependencyGraph {
    int rows = 0;  ///< branch grid
    int cols = 0;
    InteractionPattern pattern = InteractionPattern::none;
    std::vector<DependencyEdge> edges;

    int nodes() const { return rows * cols; }
    /// Per node: (neighbor, volume), in edge order.
    std::vector<std::vector<std::pair<int, double>>> adjacency() const;
};

/// Branch ids are row-major over the branch grid. `volume_scale` multiplies every
/// edge volume.
DependencyGraph build_dependency_graph(const StageSpec& stage, InteractionPattern pattern,
                                       int bytes_per_element, double volume_scale = 1.0);

struct Slot {
    int layer = 0;
    int subarray = 0;
    bool operator==(const Slot&) const = default;
};

struct Binding {
    std::vector<Slot> slot_of;  ///< per branch
    bool operator==(const Binding&) const = default;
};

enum class BindStrategy { greedy, row_major };
std::string_view to_string(BindStrategy s);
BindStrategy parse_bind_strategy(std::string_view s);

/// `counts[j]` branches go to layer j; layouts[j] must have at least that many sub-arrays.
Binding greedy_bind(const std::vector<int>& counts, const std::vector<LayerLayout>& layouts,
                    const DependencyGraph& graph);
Binding row_major_bind(const std::vector<int>& counts, const std::vector<LayerLayout>& layouts);

struct EdgeCost {
    int a = 0;
    int b = 0;
    double volume = 0;
    int inter_hops = 0;
    double gather_hop_bytes = 0;
    double inter_hop_bytes = 0;
    double scatter_hop_bytes = 0;

    double total_hop_bytes() const { return gather_hop_bytes + inter_hop_bytes + scatter_hop_bytes; }
};

struct InteractionCost {
    double total_hop_bytes = 0;  ///< gather + inter + scatter
    double inter_hop_bytes = 0;
    double avg_hops = 0;         ///< volume-weighted inter-sub-array hops
    double bytes = 0;            ///< Σ edge volumes, one event
    std::int64_t event_cycles = 0;
    std::vector<EdgeCost> edges;
};

InteractionCost interaction_cost(const Binding& binding, const std::vector<LayerLayout>& layouts,
                                 const DependencyGraph& graph, const ArchSpec& arch);

/// Interaction events per stage: one per block pair for shifted windows, one per block for rings.
int interaction_events(InteractionPattern pattern, int blocks);

struct StagePlacement {
    int stage = 0;
    std::vector<LayerLayout> layouts;  ///< one per temporal layer
    std::vector<int> counts;
    DependencyGraph graph;
    Binding binding;
    InteractionCost cost;
    int events = 0;
};

struct Placement {
    std::string model_name;
    std::string arch_name;
    BindStrategy strategy = BindStrategy::greedy;
    std::vector<StagePlacement> stages;
};

/// Lays out every temporal layer and binds each stage's branches. Throws
/// ValidationError when a layer holds more branches than its layout can fit.
Placement place(const Schedule& schedule, const ModelSpec& model, const ArchSpec& arch,
                BindStrategy strategy = BindStrategy::greedy);

/// Rebuilds a placement from a schedule and a stored binding (placement document).
Placement place_with_binding(const Schedule& schedule, const ModelSpec& model, const ArchSpec& arch,
                             std::string_view placement_json);

std::string placement_to_json(const Placement& p);
/// Grid rendering of every temporal layer, annotated with the bound branch ids.
std::string render_placement(const Placement& p);

}  // namespace pimorch
