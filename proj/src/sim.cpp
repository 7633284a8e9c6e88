#include "pimorch/sim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "json_util.hpp"
#include "pimorch/errors.hpp"

namespace pimorch {

using detail::json;

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::compute: return "compute";
        case EventKind::transfer: return "transfer";
        case EventKind::weight_share: return "weight_share";
        case EventKind::interaction: return "interaction";
    }
    return "?";
}

namespace {

// Useful MACs of one branch through the whole stage (padding excluded).
double branch_macs(const ModelSpec& model, const StageSpec& st) {
    const double n = st.region_patches;
    const double c = static_cast<double>(st.channels);
    const double a1 = model.ffn_ratio;
    const double block = n * c * 3 * c + 2 * n * n * c + n * c * c + 2 * n * c * a1 * c;
    const double pm = st.index >= 2 ? n * model.pm_ratio * c * c : 0.0;
    return st.blocks * block + pm;
}

}  // namespace

double model_macs(const ModelSpec& model) {
    double total = 0;
    for (const auto& st : derive_stages(model)) total += st.branches * branch_macs(model, st);
    return total;
}

SimResult simulate(const IlpInstance& inst, const Schedule& schedule, const Placement& placement,
                   std::string label) {
    const std::size_t S = inst.stages.size();
    if (schedule.stages.size() != S || placement.stages.size() != S) {
        throw ValidationError("simulate: schedule, placement and model disagree on the stage count");
    }
    const int batch = inst.batch();
    const bool sharing = inst.options.sharing;
    const auto& arch = inst.arch;
    const int bpe = inst.model.bytes_per_element;

    SimResult out;
    auto& tl = out.timeline;
    auto& rep = out.report;
    rep.label = std::move(label);
    rep.model = inst.model.name;
    rep.arch = arch.name;
    rep.batch = batch;
    rep.clock_mhz = arch.clock_mhz;
    rep.node_cap = arch.node_cap;
    rep.memory = schedule.memory;

    EnergyInputs energy_in;
    std::int64_t cursor = 0;

    for (std::size_t s = 0; s < S; ++s) {
        const auto& st = inst.stages[s].stage;
        const auto& layers = schedule.stages[s].layers;
        const auto& sp = placement.stages[s];
        if (sp.layouts.size() != layers.size()) {
            throw ValidationError("simulate: stage " + std::to_string(st.index) +
                                  " placement has a different number of temporal layers");
        }
        StageReport sr;
        sr.stage = st.index;
        const std::int64_t stage_start = cursor;

        for (std::size_t j = 0; j < layers.size(); ++j) {
            const auto& ch = layers[j].choice;
            if (sp.layouts[j].u != ch.u || sp.layouts[j].v != ch.v || sp.counts[j] != ch.count) {
                throw ValidationError("simulate: stage " + std::to_string(st.index) + " layer " +
                                      std::to_string(j) + " does not match the placement");
            }
            if (ch.count <= 0) continue;
            if (!candidate_shape_ok(st, arch, ch.u, ch.v)) {
                throw ValidationError("simulate: stage " + std::to_string(st.index) + " layer " +
                                      std::to_string(j) + " has an invalid partition");
            }
            ++sr.layers;
            rep.macs += static_cast<double>(ch.count) * branch_macs(inst.model, st) * batch;
            const Candidate c = build_candidate(inst.model, st, arch, ch.u, ch.v);
            const int nodes = ch.count * ch.u * ch.v;

            auto push = [&](EventKind kind, PhaseId phase, int block, std::int64_t dur) {
                if (dur <= 0) return;
                tl.events.push_back({st.index, static_cast<int>(j), block, phase, kind, cursor, dur, nodes});
                cursor += dur;
            };
            auto run_phase = [&](const PhaseDescriptor& ph, int block) {
                const PhaseCost pc = phase_cost(ph, inst.params);
                const double share_bytes = sharing ? ph.weight_share_bytes : 0.0;
                if (sharing) {
                    push(EventKind::weight_share, ph.id, block, pc.weight_share);
                    rep.weight_share_cycles += pc.weight_share;
                }
                push(EventKind::transfer, ph.id, block, batch * pc.transfer);
                push(EventKind::compute, ph.id, block, batch * pc.compute);
                rep.transfer_cycles += batch * pc.transfer;
                rep.compute_cycles += batch * pc.compute;

                const double moved = (static_cast<double>(ph.transfer_bytes) * batch + share_bytes) * nodes;
                rep.noc_bytes += moved;
                energy_in.noc_bit_hops += moved * 8.0;
                energy_in.mem_bits +=
                    static_cast<double>(phase_memory_bytes(ph, bpe)) * batch * nodes * 8.0;
            };

            if (auto pm = patch_merge_phase(c)) run_phase(*pm, -1);
            const auto plan = phase_plan(c);
            for (int b = 0; b < st.blocks; ++b) {
                for (const auto& ph : plan) run_phase(ph, b);
            }
        }

        for (int e = 0; e < sp.events; ++e) {
            if (sp.cost.event_cycles <= 0) break;
            tl.events.push_back({st.index, -1, -1, PhaseId::patch_merge, EventKind::interaction, cursor,
                                 sp.cost.event_cycles, 0});
            cursor += sp.cost.event_cycles;
            sr.interaction_cycles += sp.cost.event_cycles;
            rep.noc_bytes += sp.cost.bytes;
            energy_in.noc_bit_hops += sp.cost.total_hop_bytes * 8.0;
        }
        rep.interaction_cycles += sr.interaction_cycles;
        sr.cycles = cursor - stage_start;
        sr.avg_hops = sp.cost.avg_hops;
        sr.total_hop_bytes = sp.cost.total_hop_bytes;
        rep.stages.push_back(sr);
    }

    rep.total_cycles = cursor;
    const Utilization u = node_utilization(tl, arch, static_cast<int>(S));
    for (std::size_t s = 0; s < S; ++s) rep.stages[s].utilization = u.per_stage[s];
    rep.utilization = u.overall;

    energy_in.macs = rep.macs;
    rep.energy = energy(energy_in, inst.params);
    const double peak = static_cast<double>(arch.nodes()) * arch.pe_size * arch.pe_size;
    rep.ideal_cycles = static_cast<std::int64_t>(std::ceil(rep.macs / peak));
    return out;
}

Utilization node_utilization(const Timeline& timeline, const ArchSpec& arch, int stages) {
    Utilization u;
    std::vector<double> busy(stages, 0), all(stages, 0);
    for (const auto& e : timeline.events) {
        if (e.kind == EventKind::interaction || e.stage < 1 || e.stage > stages) continue;
        busy[e.stage - 1] += static_cast<double>(e.nodes) * e.duration;
        all[e.stage - 1] += static_cast<double>(arch.nodes()) * e.duration;
    }
    double b = 0, a = 0;
    for (int s = 0; s < stages; ++s) {
        u.per_stage.push_back(all[s] > 0 ? busy[s] / all[s] : 0.0);
        b += busy[s];
        a += all[s];
    }
    u.overall = a > 0 ? b / a : 0.0;
    return u;
}

// ---------------------------------------------------------------------------

std::string_view to_string(BaselineKind k) {
    switch (k) {
        case BaselineKind::branch: return "B";
        case BaselineKind::patch: return "P";
        case BaselineKind::head: return "AH";
    }
    return "?";
}

BaselineKind parse_baseline(std::string_view s) {
    std::string t(s);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "b" || t == "branch") return BaselineKind::branch;
    if (t == "p" || t == "patch") return BaselineKind::patch;
    if (t == "ah" || t == "head") return BaselineKind::head;
    throw ConfigError("unknown baseline '" + std::string(s) + "' (expected b, p or ah)");
}

std::vector<std::vector<LayerChoice>> baseline_layers(const IlpInstance& inst, BaselineKind kind) {
    std::vector<std::vector<LayerChoice>> out;
    for (const auto& t : inst.stages) {
        int u = 1, v = 1;
        auto fits = [&](int uu, int vv) {
            return candidate_shape_ok(t.stage, inst.arch, uu, vv) && packing_limit(inst.arch, uu, vv) > 0;
        };
        if (kind == BaselineKind::patch) {
            for (int x : t.domains.u) {
                if (fits(x, 1)) u = std::max(u, x);
            }
        } else if (kind == BaselineKind::head) {
            for (int x : t.domains.v) {
                if (fits(1, x)) v = std::max(v, x);
            }
        }
        const int cap = packing_limit(inst.arch, u, v);
        auto& layers = out.emplace_back();
        for (int rem = t.stage.branches; rem > 0; rem -= cap) layers.push_back({std::min(cap, rem), u, v});
    }
    return out;
}

BaselineRun run_baseline(const IlpInstance& inst, BaselineKind kind) {
    BaselineRun r;
    r.kind = kind;
    r.schedule = evaluate_schedule(inst, baseline_layers(inst, kind));
    r.schedule.status = SolveStatus::fixed;
    r.placement = place(r.schedule, inst.model, inst.arch, BindStrategy::greedy);
    r.result = simulate(inst, r.schedule, r.placement, std::string(to_string(kind)));
    return r;
}

// ---------------------------------------------------------------------------

ReportFormat parse_report_format(std::string_view s) {
    if (s == "text") return ReportFormat::text;
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    throw ConfigError("unknown report format '" + std::string(s) + "' (expected text, json or csv)");
}

namespace {

json report_json(const CostReport& r) {
    json j;
    j["label"] = r.label;
    j["model"] = r.model;
    j["arch"] = r.arch;
    j["batch"] = r.batch;
    j["clock_mhz"] = r.clock_mhz;
    j["total_cycles"] = r.total_cycles;
    j["total_ms"] = r.total_ms();
    j["breakdown"] = {{"compute_cycles", r.compute_cycles},
                      {"transfer_cycles", r.transfer_cycles},
                      {"weight_share_cycles", r.weight_share_cycles},
                      {"interaction_cycles", r.interaction_cycles}};
    j["utilization"] = r.utilization;
    json stages = json::array();
    for (const auto& s : r.stages) {
        stages.push_back({{"stage", s.stage},
                          {"layers", s.layers},
                          {"cycles", s.cycles},
                          {"interaction_cycles", s.interaction_cycles},
                          {"utilization", s.utilization},
                          {"avg_hops", s.avg_hops},
                          {"total_hop_bytes", s.total_hop_bytes}});
    }
    j["stages"] = stages;
    j["memory"] = {{"weight_bytes", r.memory.weights},
                   {"workspace_bytes", r.memory.workspace},
                   {"total_bytes", r.memory.total()},
                   {"node_cap_bytes", r.node_cap},
                   {"fits", r.memory_ok()}};
    j["energy"] = {{"noc_pj", r.energy.noc_pj},
                   {"mem_pj", r.energy.mem_pj},
                   {"mac_pj", r.energy.mac_pj},
                   {"total_pj", r.energy.total_pj()}};
    j["noc_bytes"] = r.noc_bytes;
    j["macs"] = r.macs;
    j["ideal_cycles"] = r.ideal_cycles;
    return j;
}

std::string pct(std::int64_t part, std::int64_t total) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << (total > 0 ? 100.0 * part / total : 0.0) << "%";
    return os.str();
}

std::string mib(double bytes) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << bytes / (1024.0 * 1024.0) << " MiB";
    return os.str();
}

}  // namespace

std::string emit_report(const std::vector<CostReport>& reports, ReportFormat format) {
    std::ostringstream os;
    switch (format) {
        case ReportFormat::json: {
            json doc;
            doc["schema_version"] = 1;
            doc["kind"] = "cost_report";
            json arr = json::array();
            for (const auto& r : reports) arr.push_back(report_json(r));
            doc["reports"] = arr;
            os << doc.dump(2) << "\n";
            break;
        }
        case ReportFormat::csv: {
            os << "label,model,arch,batch,total_cycles,total_ms,compute_cycles,transfer_cycles,"
                  "weight_share_cycles,interaction_cycles,utilization,weight_bytes,workspace_bytes,"
                  "memory_fits,noc_pj,mem_pj,mac_pj,total_pj,noc_bytes,macs,ideal_cycles,relative_latency\n";
            const double base = reports.empty() ? 0.0 : static_cast<double>(reports.front().total_cycles);
            os << std::setprecision(10);
            for (const auto& r : reports) {
                os << r.label << ',' << r.model << ',' << r.arch << ',' << r.batch << ',' << r.total_cycles
                   << ',' << r.total_ms() << ',' << r.compute_cycles << ',' << r.transfer_cycles << ','
                   << r.weight_share_cycles << ',' << r.interaction_cycles << ',' << r.utilization << ','
                   << r.memory.weights << ',' << r.memory.workspace << ',' << (r.memory_ok() ? 1 : 0) << ','
                   << r.energy.noc_pj << ',' << r.energy.mem_pj << ',' << r.energy.mac_pj << ','
                   << r.energy.total_pj() << ',' << r.noc_bytes << ',' << r.macs << ',' << r.ideal_cycles
                   << ',' << (base > 0 ? r.total_cycles / base : 0.0) << '\n';
            }
            break;
        }
        case ReportFormat::text: {
            for (const auto& r : reports) {
                os << r.label << ": " << r.model << " on " << r.arch << ", batch " << r.batch << "\n";
                os << "  total         " << r.total_cycles << " cycles (" << std::fixed << std::setprecision(3)
                   << r.total_ms() << " ms)\n";
                os << "  compute       " << r.compute_cycles << "  " << pct(r.compute_cycles, r.total_cycles) << "\n";
                os << "  transfer      " << r.transfer_cycles << "  " << pct(r.transfer_cycles, r.total_cycles)
                   << "\n";
                os << "  weight share  " << r.weight_share_cycles << "  "
                   << pct(r.weight_share_cycles, r.total_cycles) << "\n";
                os << "  interaction   " << r.interaction_cycles << "  "
                   << pct(r.interaction_cycles, r.total_cycles) << "\n";
                os << "  utilization   " << std::setprecision(4) << r.utilization << "  (";
                for (std::size_t i = 0; i < r.stages.size(); ++i) {
                    os << (i ? ", " : "") << "s" << r.stages[i].stage << " " << r.stages[i].utilization;
                }
                os << ")\n";
                os << "  avg hops     ";
                for (const auto& s : r.stages) os << " s" << s.stage << " " << std::setprecision(2) << s.avg_hops;
                os << "\n";
                os << "  memory        weights " << mib(r.memory.weights) << " + workspace "
                   << mib(static_cast<double>(r.memory.workspace)) << " = " << mib(r.memory.total()) << " of "
                   << mib(static_cast<double>(r.node_cap)) << (r.memory_ok() ? "" : "  (exceeds capacity)")
                   << "\n";
                os << "  energy        " << std::setprecision(3) << r.energy.total_pj() * 1e-6 << " uJ (noc "
                   << r.energy.noc_pj * 1e-6 << ", memory " << r.energy.mem_pj * 1e-6 << ", mac "
                   << r.energy.mac_pj * 1e-6 << ")\n";
                os << "  MACs          " << std::setprecision(0) << r.macs << "  ideal " << r.ideal_cycles
                   << " cycles\n\n";
                os.unsetf(std::ios::fixed);
            }
            if (reports.size() > 1) {
                os << "label          cycles  relative to " << reports.front().label << "\n";
                for (const auto& r : reports) {
                    os << std::left << std::setw(8) << r.label << std::right << std::setw(14) << r.total_cycles
                       << "  " << std::fixed << std::setprecision(2)
                       << static_cast<double>(r.total_cycles) / std::max<std::int64_t>(1, reports.front().total_cycles)
                       << "x\n";
                    os.unsetf(std::ios::fixed);
                }
            }
            break;
        }
    }
    return os.str();
}

std::vector<CostReport> reports_from_json(std::string_view text) {
    constexpr std::string_view kWhere = "report";
    const json doc = detail::parse_document(text, kWhere);
    detail::check_schema_version(doc, 1, kWhere);
    const json& arr = detail::require(doc, "reports", kWhere);
    if (!arr.is_array()) throw ValidationError("report: 'reports' must be an array");
    std::vector<CostReport> out;
    for (const auto& j : arr) {
        CostReport r;
        r.label = detail::get<std::string>(j, "label", kWhere);
        r.model = detail::get<std::string>(j, "model", kWhere);
        r.arch = detail::get<std::string>(j, "arch", kWhere);
        r.batch = detail::get<int>(j, "batch", kWhere);
        r.clock_mhz = detail::get<double>(j, "clock_mhz", kWhere);
        r.total_cycles = detail::get<std::int64_t>(j, "total_cycles", kWhere);
        const json& b = detail::require(j, "breakdown", kWhere);
        r.compute_cycles = detail::get<std::int64_t>(b, "compute_cycles", kWhere);
        r.transfer_cycles = detail::get<std::int64_t>(b, "transfer_cycles", kWhere);
        r.weight_share_cycles = detail::get<std::int64_t>(b, "weight_share_cycles", kWhere);
        r.interaction_cycles = detail::get<std::int64_t>(b, "interaction_cycles", kWhere);
        r.utilization = detail::get<double>(j, "utilization", kWhere);
        for (const auto& s : detail::require(j, "stages", kWhere)) {
            StageReport sr;
            sr.stage = detail::get<int>(s, "stage", kWhere);
            sr.layers = detail::get<int>(s, "layers", kWhere);
            sr.cycles = detail::get<std::int64_t>(s, "cycles", kWhere);
            sr.interaction_cycles = detail::get<std::int64_t>(s, "interaction_cycles", kWhere);
            sr.utilization = detail::get<double>(s, "utilization", kWhere);
            sr.avg_hops = detail::get<double>(s, "avg_hops", kWhere);
            sr.total_hop_bytes = detail::get<double>(s, "total_hop_bytes", kWhere);
            r.stages.push_back(sr);
        }
        const json& m = detail::require(j, "memory", kWhere);
        r.memory.weights = detail::get<double>(m, "weight_bytes", kWhere);
        r.memory.workspace = detail::get<std::int64_t>(m, "workspace_bytes", kWhere);
        r.node_cap = detail::get<std::int64_t>(m, "node_cap_bytes", kWhere);
        const json& e = detail::require(j, "energy", kWhere);
        r.energy.noc_pj = detail::get<double>(e, "noc_pj", kWhere);
        r.energy.mem_pj = detail::get<double>(e, "mem_pj", kWhere);
        r.energy.mac_pj = detail::get<double>(e, "mac_pj", kWhere);
        r.noc_bytes = detail::get<double>(j, "noc_bytes", kWhere);
        r.macs = detail::get<double>(j, "macs", kWhere);
        r.ideal_cycles = detail::get<std::int64_t>(j, "ideal_cycles", kWhere);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace pimorch
