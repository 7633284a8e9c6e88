#include "pimorch/ilp.hpp"

#include <algorithm>
#include <sstream>

#include "json_util.hpp"
#include "pimorch/errors.hpp"
#include "pimorch/layout.hpp"

namespace pimorch {

using detail::json;

namespace {

std::string join(const std::vector<int>& xs) {
    std::string out = "{";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(xs[i]);
    }
    return out + "}";
}

int index_of(const std::vector<int>& xs, int x) {
    auto it = std::find(xs.begin(), xs.end(), x);
    return it == xs.end() ? -1 : static_cast<int>(it - xs.begin());
}

bool is_pow2(int x) { return x > 0 && (x & (x - 1)) == 0; }

std::vector<int> thin(const std::vector<int>& xs) {
    std::vector<int> out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] == 1 || is_pow2(xs[i]) || i + 1 == xs.size()) out.push_back(xs[i]);
    }
    return out;
}

struct LayerFacts {
    bool valid = false;
    int packing = 0;
    Candidate cand;
};

LayerFacts layer_facts(const IlpInstance& inst, const StageSpec& st, int u, int v) {
    LayerFacts f;
    if (!candidate_shape_ok(st, inst.arch, u, v)) return f;
    f.packing = packing_limit(inst.arch, u, v);
    if (f.packing == 0) return f;
    f.valid = true;
    f.cand = build_candidate(inst.model, st, inst.arch, u, v);
    return f;
}

double block_weight_of(const Candidate& c, bool sharing) {
    return sharing ? c.weights.stored_per_node : c.weights.stored_per_node * c.u;
}

double pm_weight_of(const Candidate& c, bool sharing, PmWeights pm) {
    if (pm == PmWeights::ignore) return 0;
    return sharing ? c.weights.pm_stored_per_node : c.weights.pm_stored_per_node * c.u;
}

}  // namespace

const CandidateEntry* StageTable::find(int u, int v) const {
    const int a = index_of(domains.u, u);
    const int b = index_of(domains.v, v);
    if (a < 0 || b < 0) return nullptr;
    return &at(a, b);
}

std::int64_t binary_count(const std::vector<Domains>& domains, const std::vector<int>& branches) {
    std::int64_t total = 0;
    for (std::size_t s = 0; s < domains.size(); ++s) {
        const std::int64_t n = branches[s];
        total += static_cast<std::int64_t>(domains[s].u.size()) * domains[s].v.size() * n * (2 * n + 1);
    }
    return total;
}

std::int64_t IlpInstance::binary_count() const {
    std::vector<Domains> d;
    std::vector<int> n;
    for (const auto& t : stages) {
        d.push_back(t.domains);
        n.push_back(t.stage.branches);
    }
    return pimorch::binary_count(d, n);
}

std::int64_t IlpInstance::integer_count() const {
    std::int64_t total = 0;
    for (const auto& t : stages) total += t.stage.branches;
    return total;
}

IlpInstance build_ilp(const ModelSpec& model, const ArchSpec& arch, const SchedulerOptions& options) {
    validate(model);
    validate(arch);
    const auto stages = derive_stages(model);
    std::vector<Domains> domains;
    std::vector<int> branches;
    for (const auto& st : stages) {
        domains.push_back(candidate_domains(st, arch));
        branches.push_back(st.branches);
    }
    if (options.coarsen_budget > 0) {
        CoarsenResult cr = coarsen(domains, branches, options.coarsen_budget);
        IlpInstance inst = build_ilp(model, arch, options, cr.domains);
        inst.notes = cr.notes;
        if (cr.warning) inst.notes.push_back("warning: " + *cr.warning);
        return inst;
    }
    return build_ilp(model, arch, options, domains);
}

IlpInstance build_ilp(const ModelSpec& model, const ArchSpec& arch, const SchedulerOptions& options,
                      const std::vector<Domains>& domains) {
    IlpInstance inst;
    inst.model = model;
    inst.arch = arch;
    inst.options = options;
    inst.params = CostParams::from(arch, model.bytes_per_element, options.cost_model);

    const auto stages = derive_stages(model);
    if (domains.size() != stages.size()) {
        throw ConfigError("ilp: domain list has " + std::to_string(domains.size()) +
                          " stages, model has " + std::to_string(stages.size()));
    }
    for (std::size_t s = 0; s < stages.size(); ++s) {
        StageTable t;
        t.stage = stages[s];
        t.domains = domains[s];
        if (t.domains.u.empty() || t.domains.v.empty()) {
            throw ConfigError("ilp: empty candidate domain for stage " + std::to_string(s + 1));
        }
        for (int a = 0; a < static_cast<int>(t.domains.u.size()); ++a) {
            for (int b = 0; b < static_cast<int>(t.domains.v.size()); ++b) {
                CandidateEntry e;
                e.alpha = a;
                e.beta = b;
                e.u = t.domains.u[a];
                e.v = t.domains.v[b];
                LayerFacts f = layer_facts(inst, t.stage, e.u, e.v);
                e.valid = f.valid;
                e.packing = f.packing;
                if (f.valid) {
                    e.cost = layer_cost(f.cand, t.stage.blocks, inst.params, options.sharing);
                    e.layer_cycles = e.cost.total(model.batch);
                    e.block_weight = block_weight_of(f.cand, options.sharing);
                    e.pm_weight = pm_weight_of(f.cand, options.sharing, model.pm_weights);
                    e.workspace = f.cand.workspace_peak();
                    e.phase_workspace = f.cand.workspace;
                }
                t.entries.push_back(e);
            }
        }
        inst.stages.push_back(std::move(t));
    }
    return inst;
}

CoarsenResult coarsen(const std::vector<Domains>& domains, const std::vector<int>& branches,
                      std::int64_t budget) {
    CoarsenResult r;
    r.domains = domains;
    if (budget <= 0 || binary_count(domains, branches) <= budget) return r;

    for (std::size_t s = 0; s < r.domains.size(); ++s) {
        r.domains[s].u = thin(r.domains[s].u);
        r.domains[s].v = thin(r.domains[s].v);
    }

    auto stage_vars = [&](std::size_t s) {
        const std::int64_t n = branches[s];
        return static_cast<std::int64_t>(r.domains[s].u.size()) * r.domains[s].v.size() * n * (2 * n + 1);
    };
    while (binary_count(r.domains, branches) > budget) {
        // Stage with the most variables that still has an interior value to drop.
        int best = -1;
        for (std::size_t s = 0; s < r.domains.size(); ++s) {
            if (r.domains[s].u.size() <= 2 && r.domains[s].v.size() <= 2) continue;
            if (best < 0 || stage_vars(s) > stage_vars(best)) best = static_cast<int>(s);
        }
        if (best < 0) break;
        auto& d = r.domains[best];
        auto& axis = d.u.size() > 2 ? d.u : d.v;
        axis.erase(axis.end() - 2);
    }
    if (binary_count(r.domains, branches) > budget) {
        for (auto& d : r.domains) {
            d.u = {1};
            d.v = {1};
        }
        if (binary_count(r.domains, branches) > budget) {
            r.warning = "variable budget " + std::to_string(budget) +
                        " is below the minimal model size " +
                        std::to_string(binary_count(r.domains, branches)) + "; using domains {1}";
        }
    }

    r.changed = true;
    for (std::size_t s = 0; s < r.domains.size(); ++s) {
        if (r.domains[s].u != domains[s].u || r.domains[s].v != domains[s].v) {
            r.notes.push_back("coarsened stage " + std::to_string(s + 1) + ": U=" +
                              join(r.domains[s].u) + " V=" + join(r.domains[s].v));
        }
    }
    return r;
}

// ---------------------------------------------------------------------------

std::string_view to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::time_limit: return "time_limit";
        case SolveStatus::fixed: return "fixed";
    }
    return "?";
}

std::vector<std::vector<LayerChoice>> Schedule::choices() const {
    std::vector<std::vector<LayerChoice>> out;
    for (const auto& st : stages) {
        auto& v = out.emplace_back();
        for (const auto& l : st.layers) v.push_back(l.choice);
    }
    return out;
}

Schedule evaluate_schedule(const IlpInstance& inst,
                           const std::vector<std::vector<LayerChoice>>& layers) {
    if (layers.size() != inst.stages.size()) {
        throw ValidationError("schedule: " + std::to_string(layers.size()) + " stages given, model has " +
                              std::to_string(inst.stages.size()));
    }
    const bool sharing = inst.options.sharing;
    Schedule out;
    out.model_name = inst.model.name;
    out.arch_name = inst.arch.name;
    out.batch = inst.batch();
    out.options = inst.options;
    out.pm_weights = inst.model.pm_weights;
    out.notes = inst.notes;

    for (std::size_t s = 0; s < layers.size(); ++s) {
        const StageTable& t = inst.stages[s];
        StageSchedule ss;
        ss.stage = t.stage.index;
        ss.branches = t.stage.branches;
        ss.blocks = t.stage.blocks;
        for (const auto& ch : layers[s]) {
            ScheduledLayer l;
            l.choice = ch;
            l.alpha = index_of(t.domains.u, ch.u);
            l.beta = index_of(t.domains.v, ch.v);
            LayerFacts f = layer_facts(inst, t.stage, ch.u, ch.v);
            l.valid = f.valid;
            l.packing = f.packing;
            if (f.valid && ch.count > 0) {
                l.cost = layer_cost(f.cand, t.stage.blocks, inst.params, sharing);
                l.cycles = l.cost.total(inst.batch());
                l.workspace_bytes = f.cand.workspace_peak();
                if (inst.options.reuse) {
                    for (std::size_t jp = 0; jp < ss.layers.size(); ++jp) {
                        const auto& prev = ss.layers[jp];
                        if (!prev.valid || prev.choice.count <= 0) continue;
                        const bool same = prev.choice.u == ch.u && prev.choice.v == ch.v;
                        const bool full = prev.choice.u == 1 && prev.choice.v == 1;
                        if (same || full) {
                            l.reuse_from = static_cast<int>(jp);
                            break;
                        }
                    }
                }
                if (!l.reuse_from) {
                    l.weight_bytes = t.stage.blocks * block_weight_of(f.cand, sharing);
                    l.pm_weight_bytes = pm_weight_of(f.cand, sharing, inst.model.pm_weights);
                }
            }
            ss.weight_bytes += l.weight_bytes + l.pm_weight_bytes;
            ss.cycles += l.cycles;
            out.memory.workspace = std::max(out.memory.workspace, l.workspace_bytes);
            ss.layers.push_back(l);
        }
        out.memory.weights += ss.weight_bytes;
        out.objective += ss.cycles;
        out.stages.push_back(std::move(ss));
    }
    out.lower_bound = out.objective;
    return out;
}

// ---------------------------------------------------------------------------

bool ValidationReport::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const ConstraintCheck& c) { return c.pass; });
}

std::vector<const ConstraintCheck*> ValidationReport::failures() const {
    std::vector<const ConstraintCheck*> out;
    for (const auto& c : checks) {
        if (!c.pass) out.push_back(&c);
    }
    return out;
}

ValidationReport check_schedule(const IlpInstance& inst, const Schedule& schedule) {
    ValidationReport r;
    r.node_cap = inst.arch.node_cap;
    r.memory = schedule.memory;

    if (schedule.stages.size() != inst.stages.size()) {
        r.checks.push_back({"Constraint 2", 0, false, 0,
                            "schedule has " + std::to_string(schedule.stages.size()) +
                                " stages, model has " + std::to_string(inst.stages.size())});
        return r;
    }

    for (std::size_t s = 0; s < inst.stages.size(); ++s) {
        const auto& t = inst.stages[s];
        const auto& ls = schedule.stages[s].layers;
        const int sid = t.stage.index;

        ConstraintCheck c1{"Constraint 1", sid, true, 0, ""};
        bool first = true;
        for (std::size_t j = 0; j < ls.size(); ++j) {
            const double slack = ls[j].packing - ls[j].choice.count;
            if (first || slack < c1.slack) c1.slack = slack;
            first = false;
            if (slack < 0) {
                c1.pass = false;
                c1.detail += "layer " + std::to_string(j) + " holds " + std::to_string(ls[j].choice.count) +
                             " branches, at most " + std::to_string(ls[j].packing) + " fit; ";
            }
        }
        r.checks.push_back(c1);

        int covered = 0;
        for (const auto& l : ls) covered += l.choice.count;
        ConstraintCheck c2{"Constraint 2", sid, covered == t.stage.branches,
                           static_cast<double>(t.stage.branches - covered),
                           std::to_string(covered) + " of " + std::to_string(t.stage.branches) +
                               " branches assigned"};
        r.checks.push_back(c2);

        ConstraintCheck c3{"Constraint 3", sid, true, 0, ""};
        if (static_cast<int>(ls.size()) > t.stage.branches) {
            c3.pass = false;
            c3.detail += std::to_string(ls.size()) + " layers exceed N^tl = " +
                         std::to_string(t.stage.branches) + "; ";
        }
        for (std::size_t j = 0; j < ls.size(); ++j) {
            const auto& l = ls[j];
            if (l.choice.count < 0 || (l.choice.count > 0 && (l.alpha < 0 || l.beta < 0 || !l.valid))) {
                c3.pass = false;
                c3.slack -= 1;
                c3.detail += "layer " + std::to_string(j) + " candidate (" + std::to_string(l.choice.u) +
                             "," + std::to_string(l.choice.v) + ") is not in the stage domains; ";
            }
        }
        r.checks.push_back(c3);

        ConstraintCheck c4{"Constraint 4", sid, true, 0, ""};
        for (std::size_t j = 1; j < ls.size(); ++j) {
            const double slack = ls[j - 1].choice.count - ls[j].choice.count;
            if (j == 1 || slack < c4.slack) c4.slack = slack;
            if (slack < 0) {
                c4.pass = false;
                c4.detail += "layer " + std::to_string(j) + " has more branches than layer " +
                             std::to_string(j - 1) + "; ";
            }
        }
        r.checks.push_back(c4);
    }

    const double total = schedule.memory.total();
    ConstraintCheck c5{"Constraint 5", 0, total <= static_cast<double>(inst.arch.node_cap),
                       static_cast<double>(inst.arch.node_cap) - total, ""};
    std::ostringstream os;
    os << "weights " << schedule.memory.weights << " B + workspace " << schedule.memory.workspace
       << " B vs capacity " << inst.arch.node_cap << " B";
    c5.detail = os.str();
    r.checks.push_back(c5);
    return r;
}

std::string report_to_json(const ValidationReport& r) {
    json doc;
    doc["schema_version"] = 1;
    doc["kind"] = "schedule_check";
    doc["ok"] = r.ok();
    json checks = json::array();
    for (const auto& c : r.checks) {
        json j;
        j["name"] = c.name;
        j["stage"] = c.stage;
        j["pass"] = c.pass;
        j["slack"] = c.slack;
        j["detail"] = c.detail;
        checks.push_back(j);
    }
    doc["checks"] = checks;
    doc["memory"] = {{"weight_bytes", r.memory.weights},
                     {"workspace_bytes", r.memory.workspace},
                     {"total_bytes", r.memory.total()},
                     {"node_cap_bytes", r.node_cap}};
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

std::string schedule_to_json(const Schedule& s) {
    json doc;
    doc["schema_version"] = 1;
    doc["kind"] = "schedule";
    doc["model"] = s.model_name;
    doc["arch"] = s.arch_name;
    doc["batch"] = s.batch;
    doc["options"] = {{"reuse", s.options.reuse},
                      {"sharing", s.options.sharing},
                      {"cost_model", std::string(to_string(s.options.cost_model))},
                      {"pm_weights", std::string(to_string(s.pm_weights))}};
    doc["status"] = std::string(to_string(s.status));
    doc["objective_cycles"] = s.objective;
    doc["lower_bound_cycles"] = s.lower_bound;
    doc["gap"] = s.gap;
    doc["memory"] = {{"weight_bytes", s.memory.weights},
                     {"workspace_bytes", s.memory.workspace},
                     {"total_bytes", s.memory.total()}};
    json stages = json::array();
    for (const auto& st : s.stages) {
        json js;
        js["stage"] = st.stage;
        js["branches"] = st.branches;
        js["blocks"] = st.blocks;
        js["weight_bytes"] = st.weight_bytes;
        js["cycles"] = st.cycles;
        json layers = json::array();
        for (const auto& l : st.layers) {
            json jl;
            jl["count"] = l.choice.count;
            jl["u"] = l.choice.u;
            jl["v"] = l.choice.v;
            jl["alpha"] = l.alpha;
            jl["beta"] = l.beta;
            jl["reuse_from"] = l.reuse_from ? json(*l.reuse_from) : json(nullptr);
            jl["weight_bytes"] = l.weight_bytes;
            jl["pm_weight_bytes"] = l.pm_weight_bytes;
            jl["workspace_bytes"] = l.workspace_bytes;
            jl["compute_cycles"] = l.cost.compute;
            jl["transfer_cycles"] = l.cost.transfer;
            jl["weight_share_cycles"] = l.cost.weight_share;
            jl["cycles"] = l.cycles;
            layers.push_back(jl);
        }
        js["layers"] = layers;
        stages.push_back(js);
    }
    doc["stages"] = stages;
    doc["notes"] = s.notes;
    return doc.dump(2) + "\n";
}

std::vector<std::vector<LayerChoice>> load_schedule_choices(std::string_view text) {
    constexpr std::string_view kWhere = "schedule";
    const json doc = detail::parse_document(text, kWhere);
    if (!doc.is_object()) throw ValidationError("schedule: document must be an object");
    detail::check_schema_version(doc, 1, kWhere);
    const json& stages = detail::require(doc, "stages", kWhere);
    if (!stages.is_array()) throw ValidationError("schedule: 'stages' must be an array");
    std::vector<std::vector<LayerChoice>> out;
    for (const auto& st : stages) {
        const json& layers = detail::require(st, "layers", "schedule.stages[]");
        if (!layers.is_array()) throw ValidationError("schedule.stages[]: 'layers' must be an array");
        auto& v = out.emplace_back();
        for (const auto& l : layers) {
            LayerChoice c;
            c.count = detail::get<int>(l, "count", "schedule.layers[]");
            c.u = detail::get<int>(l, "u", "schedule.layers[]");
            c.v = detail::get<int>(l, "v", "schedule.layers[]");
            v.push_back(c);
        }
    }
    return out;
}

}  // namespace pimorch
