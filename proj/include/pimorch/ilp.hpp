/**
 * @file ilp.hpp
 * @brief Scheduling ILP: temporal layers, per-layer branch counts and partition
 * candidates per stage, with weight sharing/reuse and the per-node memory limit.
 *
 * The instance keeps the coefficient tables; materialize() writes the explicit
 * 0-1 model (X, Y, Z, V^dyn) for small instances and solve() runs the built-in
 * exact branch-and-bound on the table form.
 */
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pimorch/arch.hpp"
#include "pimorch/cost.hpp"
#include "pimorch/model.hpp"
#include "pimorch/partition.hpp"

namespace pimorch {

struct SchedulerOptions {
    bool reuse = true;
    bool sharing = true;
    UtilizationModel cost_model = UtilizationModel::ideal;
    double time_limit_s = 60.0;
    std::int64_t coarsen_budget = 0;  ///< 0 disables coarsening
    int threads = 0;                  ///< 0 = hardware concurrency
};

/// Coefficients of one (alpha, beta) candidate of a stage.
struct CandidateEntry {
    int alpha = 0;
    int beta = 0;
    int u = 1;
    int v = 1;
    bool valid = false;  ///< shape fits the grid and v <= heads
    int packing = 0;     ///< N_{alpha,beta}
    LayerCost cost;
    std::int64_t layer_cycles = 0;  ///< N^bt (T^c + T^t) + T^ws
    double block_weight = 0;        ///< per node, one block
    double pm_weight = 0;           ///< per node, once per stage
    std::int64_t workspace = 0;     ///< peak over phases
    std::array<std::int64_t, 10> phase_workspace{};
};

struct StageTable {
    StageSpec stage;
    Domains domains;
    std::vector<CandidateEntry> entries;  ///< alpha * |V| + beta

    const CandidateEntry& at(int alpha, int beta) const {
        return entries[static_cast<std::size_t>(alpha) * domains.v.size() + beta];
    }
    /// Entry for (u, v), or nullptr when not in the domains.
    const CandidateEntry* find(int u, int v) const;
};

struct IlpInstance {
    ModelSpec model;
    ArchSpec arch;
    SchedulerOptions options;
    CostParams params;
    std::vector<StageTable> stages;
    std::vector<std::string> notes;  ///< coarsening and other build remarks

    int batch() const { return model.batch; }
    std::int64_t binary_count() const;
    std::int64_t integer_count() const;
};

/// Builds coefficient tables. Applies options.coarsen_budget when set.
IlpInstance build_ilp(const ModelSpec& model, const ArchSpec& arch, const SchedulerOptions& options);

/// Same, with explicit per-stage domains (used by coarsening and tests).
IlpInstance build_ilp(const ModelSpec& model, const ArchSpec& arch, const SchedulerOptions& options,
                      const std::vector<Domains>& domains);

/// Σ_s |U_s| |V_s| N^br_s (2 N^br_s + 1)
std::int64_t binary_count(const std::vector<Domains>& domains, const std::vector<int>& branches);

struct CoarsenResult {
    std::vector<Domains> domains;
    bool changed = false;
    std::optional<std::string> warning;
    std::vector<std::string> notes;
};

/// Thins domains to {1, powers of two, max}, then drops the largest interior value
/// from the stage contributing most variables until the budget holds.
CoarsenResult coarsen(const std::vector<Domains>& domains, const std::vector<int>& branches,
                      std::int64_t budget);

// ---------------------------------------------------------------------------
// Schedules

struct LayerChoice {
    int count = 0;
    int u = 1;
    int v = 1;
    bool operator==(const LayerChoice&) const = default;
};

struct ScheduledLayer {
    LayerChoice choice;
    int alpha = -1;  ///< -1 when (u, v) is outside the stage domains
    int beta = -1;
    bool valid = false;
    int packing = 0;
    std::optional<int> reuse_from;
    double weight_bytes = 0;     ///< vol_{s,j} * N^bk contribution after reuse
    double pm_weight_bytes = 0;  ///< patch-merge share after reuse
    std::int64_t workspace_bytes = 0;
    LayerCost cost;
    std::int64_t cycles = 0;
};

struct StageSchedule {
    int stage = 0;
    int branches = 0;
    int blocks = 0;
    std::vector<ScheduledLayer> layers;
    double weight_bytes = 0;  ///< N^bk V^wt_s + patch-merge weights
    std::int64_t cycles = 0;
};

struct MemoryBreakdown {
    double weights = 0;
    std::int64_t workspace = 0;
    double total() const { return weights + static_cast<double>(workspace); }
};

enum class SolveStatus { optimal, time_limit, fixed };
std::string_view to_string(SolveStatus s);

struct Schedule {
    std::string model_name;
    std::string arch_name;
    int batch = 1;
    SchedulerOptions options;
    PmWeights pm_weights = PmWeights::count;
    std::vector<StageSchedule> stages;
    std::int64_t objective = 0;
    MemoryBreakdown memory;
    SolveStatus status = SolveStatus::fixed;
    double gap = 0;               ///< relative, 0 when proven optimal
    std::int64_t lower_bound = 0;
    std::vector<std::string> notes;

    std::vector<std::vector<LayerChoice>> choices() const;
};

/// Fills reuse, weights, workspace and costs for a given layer assignment.
/// Layers with shapes that do not fit are kept with valid = false and zero cost.
Schedule evaluate_schedule(const IlpInstance& inst, const std::vector<std::vector<LayerChoice>>& layers);

/// Exact optimum. Throws InfeasibleError("Constraint 5") when no assignment fits in memory.
Schedule solve(const IlpInstance& inst);

std::string schedule_to_json(const Schedule& s);
/// Reads the layer assignment from a schedule document (other fields are recomputed).
std::vector<std::vector<LayerChoice>> load_schedule_choices(std::string_view text);

// ---------------------------------------------------------------------------
// Verification

struct ConstraintCheck {
    std::string name;  ///< "Constraint 1" .. "Constraint 5"
    int stage = 0;     ///< 0 for global checks
    bool pass = true;
    double slack = 0;
    std::string detail;
};

struct ValidationReport {
    std::vector<ConstraintCheck> checks;
    MemoryBreakdown memory;
    std::int64_t node_cap = 0;

    bool ok() const;
    std::vector<const ConstraintCheck*> failures() const;
};

ValidationReport check_schedule(const IlpInstance& inst, const Schedule& schedule);
std::string report_to_json(const ValidationReport& r);

// ---------------------------------------------------------------------------
// Explicit 0-1 model

enum class VarType { binary, integer };
enum class Sense { le, ge, eq };

struct Variable {
    std::string name;
    VarType type = VarType::binary;
    double lb = 0;
    double ub = 1;
};

struct LinearTerm {
    int var = 0;
    double coef = 0;
};

struct LinearConstraint {
    std::string family;
    std::vector<LinearTerm> terms;
    Sense sense = Sense::le;
    double rhs = 0;
};

/// Variable numbering shared by materialize() and assignment().
class IlpLayout {
public:
    explicit IlpLayout(const IlpInstance& inst);

    int x(int s, int i, int j, int a, int b) const;  ///< i is the branch count, 1-based
    int y(int s, int j, int jp, int a, int b) const;
    int z(int s, int j, int a, int b) const;
    int vdyn(int s, int j) const;
    int size() const { return total_; }

private:
    struct StageDims {
        int n = 0, nu = 0, nv = 0;
        int x0 = 0, y0 = 0, z0 = 0, w0 = 0;
    };
    std::vector<StageDims> dims_;
    int total_ = 0;
};

struct ExplicitModel {
    std::vector<Variable> vars;
    std::vector<LinearConstraint> rows;
    std::vector<LinearTerm> objective;

    std::int64_t binary_count() const;
    std::int64_t integer_count() const;
    double objective_value(const std::vector<double>& x) const;
    /// Families of violated rows and out-of-bound variables, empty when feasible.
    std::vector<std::string> violations(const std::vector<double>& x, double tol = 1e-6) const;
    /// CPLEX LP format for external solvers.
    void write_lp(std::ostream& os) const;
};

/// Throws ConfigError when the row count would exceed max_terms nonzeros.
ExplicitModel materialize(const IlpInstance& inst, std::int64_t max_terms = 20'000'000);

/// Variable values encoding a schedule (X, Y, Z, V^dyn) in IlpLayout numbering.
std::vector<double> assignment(const IlpInstance& inst, const Schedule& schedule);

}  // namespace pimorch
