/**
 * @file partition.hpp
 * @brief Partitioning candidates for one computational branch and their closed-form
 *        per-node quantities (tile sizes, cyclic-dataflow volumes, weights, workspace).
 *
 * Axis convention: a branch occupies a u x v sub-array. The u nodes of a column share
 * the patches of the region (p = ceil(N/u) each) and circulate K/V vertically; the v
 * columns split the attention heads (b = ceil(h/v) heads, q = b*d channels each) and
 * gather feature slices horizontally.
 */
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "pimorch/arch.hpp"
#include "pimorch/model.hpp"

namespace pimorch {

struct GemmDims {
    std::int64_t m = 1;  ///< output rows
    std::int64_t k = 1;  ///< inner dimension
    std::int64_t n = 1;  ///< output columns
};

/// Candidate domains U_s (head-derived) and V_s (patch-chunk-derived), ascending.
struct Domains {
    std::vector<int> u;
    std::vector<int> v;
};

/// Per-node, per-block cyclic-dataflow volumes in bytes.
struct PhaseVolumes {
    std::int64_t f = 0;       ///< (u-1) p q
    std::int64_t k = 0;       ///< (u-1) p q
    std::int64_t v = 0;       ///< (u-1) p q
    std::int64_t msa_fc = 0;  ///< (v-1) p q
    std::int64_t ffn = 0;     ///< (v-1) p q + (v-1) p a1 q
    std::int64_t ln = 0;      ///< 2 (v-1) p, mean and deviation of one layernorm
    std::int64_t pm = 0;      ///< (v-1) p a2 q, stage >= 2 only
};

/// Per-node weight storage and weight-sharing traffic, in bytes.
struct WeightFootprint {
    double stored_per_node = 0;     ///< block weights / (u v)
    double pm_stored_per_node = 0;  ///< patch-merge weights / (u v)
    double share_pm = 0;
    double share_msa = 0;
    double share_fc = 0;
    double share_ffn = 0;
};

enum class PhaseId {
    patch_merge = 0,
    layernorm1 = 1,
    qkv = 2,
    scores = 3,
    softmax = 4,
    context = 5,
    msa_fc = 6,
    layernorm2 = 7,
    ffn_fc1 = 8,
    ffn_fc2 = 9,
};

inline constexpr int kPhasesPerBlock = 9;

enum class Direction { none, vertical, horizontal };
enum class AcuOp { none, softmax_row, layernorm_row, gelu_elem };

std::string_view to_string(PhaseId p);
std::string_view to_string(Direction d);
std::string_view to_string(AcuOp op);

struct PhaseDescriptor {
    PhaseId id = PhaseId::layernorm1;
    std::optional<GemmDims> gemm;
    AcuOp acu = AcuOp::none;
    std::int64_t acu_units = 0;   ///< rows or elements per repetition
    int repeat = 1;               ///< sequential repetitions (heads) of GeMM and ACU work
    Direction direction = Direction::none;
    int rounds = 0;               ///< cyclic rounds before the phase
    std::int64_t transfer_bytes = 0;
    double weight_share_bytes = 0;
    std::int64_t workspace_bytes = 0;
    bool high_workspace = false;  ///< phases 2, 6 and 8
};

struct Candidate {
    int stage = 0;
    int alpha = 0;  ///< index into U_s
    int beta = 0;   ///< index into V_s
    int u = 1;
    int v = 1;
    int b = 0;      ///< heads per column group
    int p = 0;      ///< patches per node
    int q = 0;      ///< channels per node, b * d
    int d = 0;
    int heads = 0;
    int n_patches = 0;           ///< N = R_h * R_w
    std::int64_t channels = 0;   ///< C_s
    int ffn_ratio = 4;
    int pm_ratio = 2;
    int bytes_per_element = 1;
    PhaseVolumes volumes;
    WeightFootprint weights;
    /// Workspace per phase, index 0 is patch merging (0 on stage 1), 1..9 the block phases.
    std::array<std::int64_t, 10> workspace{};

    std::int64_t workspace_peak() const;
    int nodes() const { return u * v; }
};

Domains candidate_domains(const StageSpec& stage, const ArchSpec& arch);

/// Builds the (u, v) candidate. Throws ValidationError when the shape is infeasible
/// (u*v larger than the grid, or more head groups than heads).
Candidate build_candidate(const ModelSpec& model, const StageSpec& stage, const ArchSpec& arch,
                          int u, int v);

/// True when build_candidate would accept the shape.
bool candidate_shape_ok(const StageSpec& stage, const ArchSpec& arch, int u, int v);

/// The nine per-block phases in execution order.
std::vector<PhaseDescriptor> phase_plan(const Candidate& c);

/// Patch-merging phase executed once at stage entry; empty for stage 1.
std::optional<PhaseDescriptor> patch_merge_phase(const Candidate& c);

}  // namespace pimorch
