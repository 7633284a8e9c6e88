/**
 * @file model.hpp
 * @brief Hierarchical visual-transformer description and per-stage derived quantities.
 */
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pimorch {

enum class InteractionPattern { none, swin_shift, ring_all_to_all };

// Whether patch-merging weights enter the per-node weight footprint.
enum class PmWeights { count, ignore };

std::string_view to_string(InteractionPattern p);
InteractionPattern parse_interaction_pattern(std::string_view s);
std::string_view to_string(PmWeights w);
PmWeights parse_pm_weights(std::string_view s);

struct StageInput {
    int blocks = 0;

    bool operator==(const StageInput&) const = default;
};

struct ModelSpec {
    static constexpr int kSchemaVersion = 1;

    std::string name;
    int input_h = 0;
    int input_w = 0;
    int patch_size = 0;   ///< a
    int embed_dim = 0;    ///< C
    int head_dim = 0;     ///< d
    int region_h = 0;     ///< R_h, patches
    int region_w = 0;     ///< R_w, patches
    int ffn_ratio = 4;    ///< a1
    int pm_ratio = 2;     ///< a2
    InteractionPattern interaction = InteractionPattern::none;
    int batch = 1;
    int bytes_per_element = 1;
    PmWeights pm_weights = PmWeights::count;
    std::vector<StageInput> stages;

    bool operator==(const ModelSpec&) const = default;
};

/// Per-stage quantities derived from a validated ModelSpec. `index` is 1-based.
struct StageSpec {
    int index = 0;
    int blocks = 0;             ///< N^bk_s
    std::int64_t channels = 0;  ///< C_s
    int res_h = 0;              ///< patches along H
    int res_w = 0;
    int branch_rows = 0;        ///< ceil(res_h / R_h)
    int branch_cols = 0;
    int branches = 0;           ///< N^br_s
    int heads = 0;              ///< C_s / d
    int head_dim = 0;
    int region_h = 0;
    int region_w = 0;
    /// Patches per branch, N = R_h * R_w (edge regions are padded to this size).
    int region_patches = 0;
    /// Number of padding patches introduced by the ceiling in the branch count.
    std::int64_t padded_patches = 0;

    bool padded() const { return padded_patches > 0; }
};

/// Parses and validates a model document. Throws ParseError / ValidationError.
ModelSpec load_model(std::string_view config_text);
ModelSpec load_model_file(const std::string& path);

/// Serializes to the same document format load_model accepts.
std::string dump_model(const ModelSpec& m);

/// Checks every ModelSpec invariant, throwing ValidationError on the first violation.
void validate(const ModelSpec& m);

std::vector<StageSpec> derive_stages(const ModelSpec& m);

/// Elements of parameters held by one transformer block of the stage (12 * C_s^2 for a1 = 4).
std::int64_t block_weight_elements(const ModelSpec& m, const StageSpec& s);

/// Patch-merging weight elements at stage entry (a2 * C_s^2), zero for stage 1.
std::int64_t patch_merge_weight_elements(const ModelSpec& m, const StageSpec& s);

}  // namespace pimorch
