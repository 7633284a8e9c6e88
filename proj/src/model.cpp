#include "pimorch/model.hpp"

#include "json_util.hpp"
#include "pimorch/errors.hpp"
#include "pimorch/io.hpp"

namespace pimorch {

namespace detail {

std::string read_file(const std::string& path) { return read_text_file(path); }

}  // namespace detail

using detail::json;

std::string_view to_string(InteractionPattern p) {
    switch (p) {
        case InteractionPattern::none: return "none";
        case InteractionPattern::swin_shift: return "swin_shift";
        case InteractionPattern::ring_all_to_all: return "ring_all_to_all";
    }
    return "none";
}

InteractionPattern parse_interaction_pattern(std::string_view s) {
    if (s == "none") return InteractionPattern::none;
    if (s == "swin_shift") return InteractionPattern::swin_shift;
    if (s == "ring_all_to_all") return InteractionPattern::ring_all_to_all;
    throw ConfigError("unknown interaction pattern '" + std::string(s) + "'");
}

std::string_view to_string(PmWeights w) {
    return w == PmWeights::count ? "count" : "ignore";
}

PmWeights parse_pm_weights(std::string_view s) {
    if (s == "count") return PmWeights::count;
    if (s == "ignore") return PmWeights::ignore;
    throw ConfigError("unknown pm_weights mode '" + std::string(s) + "'");
}

namespace {

constexpr std::string_view kWhere = "model";

void fail(const std::string& msg) { throw ValidationError("model: " + msg); }

}  // namespace

void validate(const ModelSpec& m) {
    if (m.input_h <= 0 || m.input_w <= 0) fail("input_h and input_w must be positive");
    if (m.patch_size <= 0) fail("patch_size must be positive");
    if (m.embed_dim <= 0) fail("embed_dim must be positive");
    if (m.head_dim <= 0) fail("head_dim must be positive");
    if (m.region_h <= 0 || m.region_w <= 0) fail("region_h and region_w must be positive");
    if (m.input_h % m.patch_size != 0 || m.input_w % m.patch_size != 0) {
        fail("input_h and input_w must be divisible by patch_size");
    }
    if (m.embed_dim % m.head_dim != 0) fail("C not divisible by d");
    if (m.ffn_ratio < 1) fail("ffn_ratio must be >= 1");
    if (m.pm_ratio < 1) fail("pm_ratio must be >= 1");
    if (m.batch < 1) fail("batch must be >= 1");
    if (m.bytes_per_element < 1) fail("bytes_per_element must be >= 1");
    if (m.stages.empty() || m.stages.size() > 8) fail("number of stages must be in [1, 8]");
    for (std::size_t i = 0; i < m.stages.size(); ++i) {
        if (m.stages[i].blocks < 1) fail("stage " + std::to_string(i + 1) + " must have >= 1 block");
    }
    // Stage-level checks (divisibility of resolution, C_s by d) live in derive_stages.
    derive_stages(m);
}

std::vector<StageSpec> derive_stages(const ModelSpec& m) {
    std::vector<StageSpec> out;
    out.reserve(m.stages.size());
    const int base_h = m.input_h / m.patch_size;
    const int base_w = m.input_w / m.patch_size;
    for (std::size_t i = 0; i < m.stages.size(); ++i) {
        const int scale = 1 << i;
        StageSpec s;
        s.index = static_cast<int>(i) + 1;
        s.blocks = m.stages[i].blocks;
        s.channels = static_cast<std::int64_t>(m.embed_dim) * scale;
        if (m.input_h % (m.patch_size * scale) != 0 || m.input_w % (m.patch_size * scale) != 0) {
            fail("stage " + std::to_string(s.index) + " resolution not divisible by a*2^(s-1) = " +
                 std::to_string(m.patch_size * scale));
        }
        if (s.channels % m.head_dim != 0) {
            fail("stage " + std::to_string(s.index) + ": C_s not divisible by d");
        }
        s.res_h = base_h / scale;
        s.res_w = base_w / scale;
        s.region_h = m.region_h;
        s.region_w = m.region_w;
        s.branch_rows = (s.res_h + m.region_h - 1) / m.region_h;
        s.branch_cols = (s.res_w + m.region_w - 1) / m.region_w;
        s.branches = s.branch_rows * s.branch_cols;
        s.heads = static_cast<int>(s.channels / m.head_dim);
        s.head_dim = m.head_dim;
        s.region_patches = m.region_h * m.region_w;
        s.padded_patches = static_cast<std::int64_t>(s.branches) * s.region_patches -
                           static_cast<std::int64_t>(s.res_h) * s.res_w;
        out.push_back(s);
    }
    return out;
}

std::int64_t block_weight_elements(const ModelSpec& m, const StageSpec& s) {
    // W^Q, W^K, W^V, W^MSA_FC and the two FFN matrices.
    return (4 + 2 * static_cast<std::int64_t>(m.ffn_ratio)) * s.channels * s.channels;
}

std::int64_t patch_merge_weight_elements(const ModelSpec& m, const StageSpec& s) {
    if (s.index < 2) return 0;
    return static_cast<std::int64_t>(m.pm_ratio) * s.channels * s.channels;
}

ModelSpec load_model(std::string_view config_text) {
    json doc = detail::parse_document(config_text, kWhere);
    if (!doc.is_object()) throw ParseError("model: document must be an object");
    detail::reject_unknown_keys(doc,
                                {"schema_version", "name", "input_h", "input_w", "patch_size",
                                 "embed_dim", "head_dim", "region_h", "region_w", "ffn_ratio",
                                 "pm_ratio", "interaction_pattern", "batch", "bytes_per_element",
                                 "pm_weights", "stages"},
                                kWhere);
    detail::check_schema_version(doc, ModelSpec::kSchemaVersion, kWhere);

    ModelSpec m;
    m.name = detail::get<std::string>(doc, "name", kWhere);
    m.input_h = detail::get<int>(doc, "input_h", kWhere);
    m.input_w = detail::get<int>(doc, "input_w", kWhere);
    m.patch_size = detail::get<int>(doc, "patch_size", kWhere);
    m.embed_dim = detail::get<int>(doc, "embed_dim", kWhere);
    m.head_dim = detail::get<int>(doc, "head_dim", kWhere);
    m.region_h = detail::get<int>(doc, "region_h", kWhere);
    m.region_w = detail::get<int>(doc, "region_w", kWhere);
    m.ffn_ratio = detail::get_or<int>(doc, "ffn_ratio", 4, kWhere);
    m.pm_ratio = detail::get_or<int>(doc, "pm_ratio", 2, kWhere);
    m.interaction = parse_interaction_pattern(
        detail::get_or<std::string>(doc, "interaction_pattern", "none", kWhere));
    m.batch = detail::get_or<int>(doc, "batch", 1, kWhere);
    m.bytes_per_element = detail::get_or<int>(doc, "bytes_per_element", 1, kWhere);
    m.pm_weights = parse_pm_weights(detail::get_or<std::string>(doc, "pm_weights", "count", kWhere));

    const json& stages = detail::require(doc, "stages", kWhere);
    if (!stages.is_array()) throw ValidationError("model: 'stages' must be an array");
    for (const auto& st : stages) {
        if (!st.is_object()) throw ValidationError("model: each stage must be an object");
        detail::reject_unknown_keys(st, {"blocks"}, "model.stages[]");
        m.stages.push_back({detail::get<int>(st, "blocks", "model.stages[]")});
    }
    validate(m);
    return m;
}

ModelSpec load_model_file(const std::string& path) { return load_model(detail::read_file(path)); }

std::string dump_model(const ModelSpec& m) {
    json doc = json::object();
    doc["schema_version"] = ModelSpec::kSchemaVersion;
    doc["name"] = m.name;
    doc["input_h"] = m.input_h;
    doc["input_w"] = m.input_w;
    doc["patch_size"] = m.patch_size;
    doc["embed_dim"] = m.embed_dim;
    doc["head_dim"] = m.head_dim;
    doc["region_h"] = m.region_h;
    doc["region_w"] = m.region_w;
    doc["ffn_ratio"] = m.ffn_ratio;
    doc["pm_ratio"] = m.pm_ratio;
    doc["interaction_pattern"] = std::string(to_string(m.interaction));
    doc["batch"] = m.batch;
    doc["bytes_per_element"] = m.bytes_per_element;
    doc["pm_weights"] = std::string(to_string(m.pm_weights));
    json stages = json::array();
    for (const auto& st : m.stages) stages.push_back({{"blocks", st.blocks}});
    doc["stages"] = stages;
    return doc.dump(2) + "\n";
}

}  // namespace pimorch
