#include "pimorch/partition.hpp"

#include <algorithm>
#include <string>

#include "pimorch/errors.hpp"

namespace pimorch {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

std::vector<int> half_range_domain(int top) {
    std::vector<int> out;
    const int half = static_cast<int>(ceil_div(top, 2));
    for (int x = 1; x <= half; ++x) out.push_back(x);
    if (out.empty() || out.back() != top) out.push_back(top);
    return out;
}

}  // namespace

std::string_view to_string(PhaseId p) {
    switch (p) {
        case PhaseId::patch_merge: return "patch_merge";
        case PhaseId::layernorm1: return "layernorm1";
        case PhaseId::qkv: return "qkv";
        case PhaseId::scores: return "scores";
        case PhaseId::softmax: return "softmax";
        case PhaseId::context: return "context";
        case PhaseId::msa_fc: return "msa_fc";
        case PhaseId::layernorm2: return "layernorm2";
        case PhaseId::ffn_fc1: return "ffn_fc1";
        case PhaseId::ffn_fc2: return "ffn_fc2";
    }
    return "?";
}

std::string_view to_string(Direction d) {
    switch (d) {
        case Direction::none: return "none";
        case Direction::vertical: return "vertical";
        case Direction::horizontal: return "horizontal";
    }
    return "?";
}

std::string_view to_string(AcuOp op) {
    switch (op) {
        case AcuOp::none: return "none";
        case AcuOp::softmax_row: return "softmax_row";
        case AcuOp::layernorm_row: return "layernorm_row";
        case AcuOp::gelu_elem: return "gelu_elem";
    }
    return "?";
}

std::int64_t Candidate::workspace_peak() const {
    return *std::max_element(workspace.begin(), workspace.end());
}

Domains candidate_domains(const StageSpec& stage, const ArchSpec& arch) {
    Domains d;
    d.u = half_range_domain(stage.heads);
    const int chunks = static_cast<int>(ceil_div(stage.region_patches, arch.p_min));
    d.v = half_range_domain(chunks);
    return d;
}

bool candidate_shape_ok(const StageSpec& stage, const ArchSpec& arch, int u, int v) {
    if (u < 1 || v < 1) return false;
    if (static_cast<std::int64_t>(u) * v > arch.nodes()) return false;
    return v <= stage.heads;
}

Candidate build_candidate(const ModelSpec& model, const StageSpec& stage, const ArchSpec& arch,
                          int u, int v) {
    if (u < 1 || v < 1) throw ValidationError("candidate: u and v must be >= 1");
    if (static_cast<std::int64_t>(u) * v > arch.nodes()) {
        throw ValidationError("candidate: u*v = " + std::to_string(u * v) +
                              " exceeds the node count " + std::to_string(arch.nodes()));
    }
    if (v > stage.heads) {
        throw ValidationError("candidate: v = " + std::to_string(v) + " head groups but only " +
                              std::to_string(stage.heads) + " heads");
    }

    Candidate c;
    c.stage = stage.index;
    c.u = u;
    c.v = v;
    c.d = stage.head_dim;
    c.heads = stage.heads;
    c.n_patches = stage.region_patches;
    c.channels = stage.channels;
    c.ffn_ratio = model.ffn_ratio;
    c.pm_ratio = model.pm_ratio;
    c.bytes_per_element = model.bytes_per_element;
    c.p = static_cast<int>(ceil_div(c.n_patches, u));
    c.b = static_cast<int>(ceil_div(stage.heads, v));
    c.q = c.b * c.d;

    const Domains dom = candidate_domains(stage, arch);
    auto ia = std::find(dom.u.begin(), dom.u.end(), u);
    auto ib = std::find(dom.v.begin(), dom.v.end(), v);
    c.alpha = ia == dom.u.end() ? -1 : static_cast<int>(ia - dom.u.begin());
    c.beta = ib == dom.v.end() ? -1 : static_cast<int>(ib - dom.v.begin());

    const std::int64_t e = model.bytes_per_element;
    const std::int64_t p = c.p, q = c.q, C = c.channels;
    const std::int64_t a1 = model.ffn_ratio, a2 = model.pm_ratio;
    const std::int64_t um1 = u - 1, vm1 = v - 1;
    const bool merges = stage.index >= 2;

    auto& vol = c.volumes;
    vol.f = um1 * p * q * e;
    vol.k = um1 * p * q * e;
    vol.v = um1 * p * q * e;
    vol.msa_fc = vm1 * p * q * e;
    vol.ffn = (vm1 * p * q + vm1 * p * a1 * q) * e;
    vol.ln = 2 * vm1 * p * e;
    vol.pm = merges ? vm1 * p * a2 * q * e : 0;

    // Group weights of a column are spread over its u nodes and circulated in u-1 rounds.
    auto& w = c.weights;
    const double nodes = static_cast<double>(u) * v;
    w.stored_per_node = static_cast<double>(block_weight_elements(model, stage) * e) / nodes;
    w.pm_stored_per_node = static_cast<double>(patch_merge_weight_elements(model, stage) * e) / nodes;
    const double share = static_cast<double>(um1) / u;
    w.share_msa = share * static_cast<double>(3 * C * q * e);
    w.share_fc = share * static_cast<double>(C * q * e);
    w.share_ffn = share * static_cast<double>(2 * a1 * C * q * e);
    w.share_pm = merges ? share * static_cast<double>(a2 * C * q * e) : 0.0;

    // Gathered input + output + one round's weight slice; score matrices are per head.
    const std::int64_t full = static_cast<std::int64_t>(u) * p;  // padded N
    const std::int64_t d = c.d;
    auto slice = [&](std::int64_t group_elems) { return ceil_div(group_elems, u); };
    auto& ws = c.workspace;
    ws[0] = merges ? (p * a2 * C + p * q + slice(a2 * C * q)) * e : 0;
    ws[1] = (2 * p * q + 2 * p * v) * e;
    ws[2] = (p * C + 3 * p * q + slice(3 * C * q)) * e;
    ws[3] = (p * d + full * d + p * full) * e;
    ws[4] = (p * full) * e;
    ws[5] = (p * full + full * d + p * d) * e;
    ws[6] = (p * C + p * q + slice(C * q)) * e;
    ws[7] = ws[1];
    ws[8] = (p * C + p * a1 * q + slice(a1 * C * q)) * e;
    ws[9] = (p * a1 * C + p * q + slice(a1 * C * q)) * e;
    return c;
}

std::vector<PhaseDescriptor> phase_plan(const Candidate& c) {
    const std::int64_t e = c.bytes_per_element;
    const std::int64_t p = c.p, q = c.q, C = c.channels, a1 = c.ffn_ratio;
    const std::int64_t full = static_cast<std::int64_t>(c.u) * p;
    const int vr = c.v - 1, ur = c.u - 1;

    std::vector<PhaseDescriptor> out(kPhasesPerBlock);
    auto at = [&](PhaseId id) -> PhaseDescriptor& {
        auto& ph = out[static_cast<int>(id) - 1];
        ph.id = id;
        ph.workspace_bytes = c.workspace[static_cast<int>(id)];
        return ph;
    };

    auto& ln1 = at(PhaseId::layernorm1);
    ln1.acu = AcuOp::layernorm_row;
    ln1.acu_units = p;
    ln1.direction = vr > 0 ? Direction::horizontal : Direction::none;
    ln1.rounds = vr;
    ln1.transfer_bytes = c.volumes.ln;

    auto& qkv = at(PhaseId::qkv);
    qkv.gemm = GemmDims{p, C, 3 * q};
    qkv.direction = ur > 0 ? Direction::vertical : Direction::none;
    qkv.rounds = ur;
    qkv.transfer_bytes = c.volumes.f;
    qkv.weight_share_bytes = c.weights.share_msa;
    qkv.high_workspace = true;

    auto& sc = at(PhaseId::scores);
    sc.gemm = GemmDims{p, c.d, full};
    sc.repeat = c.b;
    sc.direction = ur > 0 ? Direction::vertical : Direction::none;
    sc.rounds = ur;
    sc.transfer_bytes = c.volumes.k;

    auto& sm = at(PhaseId::softmax);
    sm.acu = AcuOp::softmax_row;
    sm.acu_units = p;
    sm.repeat = c.b;

    auto& ctx = at(PhaseId::context);
    ctx.gemm = GemmDims{p, full, c.d};
    ctx.repeat = c.b;
    ctx.direction = ur > 0 ? Direction::vertical : Direction::none;
    ctx.rounds = ur;
    ctx.transfer_bytes = c.volumes.v;

    auto& fc = at(PhaseId::msa_fc);
    fc.gemm = GemmDims{p, C, q};
    fc.direction = vr > 0 ? Direction::horizontal : Direction::none;
    fc.rounds = vr;
    fc.transfer_bytes = c.volumes.msa_fc;
    fc.weight_share_bytes = c.weights.share_fc;
    fc.high_workspace = true;

    auto& ln2 = at(PhaseId::layernorm2);
    ln2 = ln1;
    ln2.id = PhaseId::layernorm2;
    ln2.workspace_bytes = c.workspace[7];

    auto& f1 = at(PhaseId::ffn_fc1);
    f1.gemm = GemmDims{p, C, a1 * q};
    f1.acu = AcuOp::gelu_elem;
    f1.acu_units = p * a1 * q;
    f1.direction = vr > 0 ? Direction::horizontal : Direction::none;
    f1.rounds = vr;
    f1.transfer_bytes = static_cast<std::int64_t>(vr) * p * q * e;
    f1.weight_share_bytes = c.weights.share_ffn / 2.0;
    f1.high_workspace = true;

    auto& f2 = at(PhaseId::ffn_fc2);
    f2.gemm = GemmDims{p, a1 * C, q};
    f2.direction = vr > 0 ? Direction::horizontal : Direction::none;
    f2.rounds = vr;
    f2.transfer_bytes = c.volumes.ffn - f1.transfer_bytes;
    f2.weight_share_bytes = c.weights.share_ffn / 2.0;
    return out;
}

std::optional<PhaseDescriptor> patch_merge_phase(const Candidate& c) {
    if (c.stage < 2) return std::nullopt;
    PhaseDescriptor ph;
    ph.id = PhaseId::patch_merge;
    ph.gemm = GemmDims{c.p, static_cast<std::int64_t>(c.pm_ratio) * c.channels, c.q};
    ph.direction = c.v > 1 ? Direction::horizontal : Direction::none;
    ph.rounds = c.v - 1;
    ph.transfer_bytes = c.volumes.pm;
    ph.weight_share_bytes = c.weights.share_pm;
    ph.workspace_bytes = c.workspace[0];
    return ph;
}

}  // namespace pimorch
