#include "pimorch/placement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include "json_util.hpp"
#include "pimorch/errors.hpp"

namespace pimorch {

using detail::json;

namespace {

int manhattan(int r0, int c0, int r1, int c1) { return std::abs(r0 - r1) + std::abs(c0 - c1); }

const SubArray& subarray_of(const std::vector<LayerLayout>& layouts, const Slot& s) {
    return layouts[s.layer].subarrays[s.subarray];
}

// Σ over member nodes of the distance to the top-left node.
double spread(const SubArray& sa) {
    double total = 0;
    for (int r = 0; r < sa.height; ++r) {
        for (int c = 0; c < sa.width; ++c) total += r + c;
    }
    return total;
}

void check_capacity(const std::vector<int>& counts, const std::vector<LayerLayout>& layouts) {
    if (counts.size() != layouts.size()) {
        throw ValidationError("placement: " + std::to_string(counts.size()) + " layer counts for " +
                              std::to_string(layouts.size()) + " layouts");
    }
    for (std::size_t j = 0; j < counts.size(); ++j) {
        if (counts[j] > layouts[j].count()) {
            throw ValidationError("placement: layer " + std::to_string(j) + " holds " +
                                  std::to_string(counts[j]) + " branches but its layout has only " +
                                  std::to_string(layouts[j].count()) + " sub-arrays");
        }
    }
}

}  // namespace

std::vector<std::vector<std::pair<int, double>>> DependencyGraph::adjacency() const {
    std::vector<std::vector<std::pair<int, double>>> adj(nodes());
    for (const auto& e : edges) {
        adj[e.a].push_back({e.b, e.volume});
        adj[e.b].push_back({e.a, e.volume});
    }
    return adj;
}

DependencyGraph build_dependency_graph(const StageSpec& stage, InteractionPattern pattern,
                                       int bytes_per_element, double volume_scale) {
    DependencyGraph g;
    g.rows = stage.branch_rows;
    g.cols = stage.branch_cols;
    g.pattern = pattern;
    const double e = bytes_per_element * volume_scale;
    const double c = static_cast<double>(stage.channels);
    auto id = [&](int r, int col) { return r * g.cols + col; };

    switch (pattern) {
        case InteractionPattern::none: break;
        case InteractionPattern::swin_shift:
            for (int r = 0; r < g.rows; ++r) {
                for (int col = 0; col < g.cols; ++col) {
                    if (col + 1 < g.cols) g.edges.push_back({id(r, col), id(r, col + 1), stage.region_h * c * e});
                    if (r + 1 < g.rows) g.edges.push_back({id(r, col), id(r + 1, col), stage.region_w * c * e});
                    if (r + 1 < g.rows && col + 1 < g.cols) {
                        g.edges.push_back({id(r, col), id(r + 1, col + 1), c * e});
                    }
                }
            }
            break;
        case InteractionPattern::ring_all_to_all: {
            const int n = g.nodes();
            const double vol = stage.region_patches * c * e;
            if (n == 2) {
                g.edges.push_back({0, 1, vol});
            } else if (n >= 3) {
                for (int i = 0; i < n; ++i) g.edges.push_back({std::min(i, (i + 1) % n), std::max(i, (i + 1) % n), vol});
            }
            break;
        }
    }
    return g;
}

std::string_view to_string(BindStrategy s) { return s == BindStrategy::greedy ? "greedy" : "row_major"; }

BindStrategy parse_bind_strategy(std::string_view s) {
    if (s == "greedy") return BindStrategy::greedy;
    if (s == "row_major") return BindStrategy::row_major;
    throw ConfigError("unknown binding strategy '" + std::string(s) + "'");
}

Binding greedy_bind(const std::vector<int>& counts, const std::vector<LayerLayout>& layouts,
                    const DependencyGraph& graph) {
    check_capacity(counts, layouts);
    const int n = graph.nodes();
    int total = 0;
    for (int c : counts) total += c;
    if (total != n) {
        throw ValidationError("placement: layers hold " + std::to_string(total) + " branches, graph has " +
                              std::to_string(n));
    }

    Binding out;
    out.slot_of.assign(n, {-1, -1});
    if (n == 0) return out;

    const auto adj = graph.adjacency();
    std::vector<std::vector<char>> used(layouts.size());
    std::vector<int> placed(layouts.size(), 0);
    for (std::size_t j = 0; j < layouts.size(); ++j) used[j].assign(layouts[j].count(), 0);

    std::vector<char> mapped(n, 0);
    std::vector<int> mapped_nb(n, 0);
    std::vector<double> vol_to_mapped(n, 0);

    auto bind = [&](int b, Slot s) {
        out.slot_of[b] = s;
        mapped[b] = 1;
        used[s.layer][s.subarray] = 1;
        ++placed[s.layer];
        for (const auto& [nb, vol] : adj[b]) {
            ++mapped_nb[nb];
            vol_to_mapped[nb] += vol;
        }
    };

    auto first_layer = std::find_if(counts.begin(), counts.end(), [](int c) { return c > 0; });
    bind(0, {static_cast<int>(first_layer - counts.begin()), 0});

    for (int step = 1; step < n; ++step) {
        int pick = -1;
        for (int b = 0; b < n; ++b) {
            if (mapped[b]) continue;
            if (pick < 0 || mapped_nb[b] > mapped_nb[pick] ||
                (mapped_nb[b] == mapped_nb[pick] && vol_to_mapped[b] > vol_to_mapped[pick])) {
                pick = b;
            }
        }

        Slot best{-1, -1};
        double best_cost = 0, best_spread = 0;
        for (std::size_t j = 0; j < layouts.size(); ++j) {
            if (placed[j] >= counts[j]) continue;
            for (int k = 0; k < layouts[j].count(); ++k) {
                if (used[j][k]) continue;
                const auto& sa = layouts[j].subarrays[k];
                double cost = 0, spread_sq = 0;
                for (const auto& [nb, vol] : adj[pick]) {
                    if (!mapped[nb]) continue;
                    const auto& other = subarray_of(layouts, out.slot_of[nb]);
                    cost += vol * manhattan(sa.row, sa.col, other.row, other.col);
                    const double dr = sa.row - other.row, dc = sa.col - other.col;
                    spread_sq += vol * (dr * dr + dc * dc);
                }
                // equal Manhattan cost: prefer the slot that keeps the cluster compact
                if (best.layer < 0 || cost < best_cost || (cost == best_cost && spread_sq < best_spread)) {
                    best = {static_cast<int>(j), k};
                    best_cost = cost;
                    best_spread = spread_sq;
                }
            }
        }
        bind(pick, best);
    }

    // pairwise improvement: swap two branches or move one to a free slot of its layer
    auto local = [&](int b) {
        const auto& sa = subarray_of(layouts, out.slot_of[b]);
        double c = 0;
        for (const auto& [nb, vol] : adj[b]) {
            const auto& sb = subarray_of(layouts, out.slot_of[nb]);
            const int hops = out.slot_of[b] == out.slot_of[nb] ? 0 : manhattan(sa.row, sa.col, sb.row, sb.col);
            c += vol * (hops + spread(sa) / sa.nodes() + spread(sb) / sb.nodes());
        }
        return c;
    };
    constexpr double eps = 1e-9;
    for (int pass = 0; pass < 64; ++pass) {
        bool improved = false;
        for (int a = 0; a < n; ++a) {
            for (int b = a + 1; b < n; ++b) {
                if (adj[a].empty() && adj[b].empty()) continue;
                const double before = local(a) + local(b);
                std::swap(out.slot_of[a], out.slot_of[b]);
                if (local(a) + local(b) < before - eps) {
                    improved = true;
                } else {
                    std::swap(out.slot_of[a], out.slot_of[b]);
                }
            }
            const int j = out.slot_of[a].layer;
            for (int k = 0; k < layouts[j].count(); ++k) {
                if (used[j][k]) continue;
                const Slot from = out.slot_of[a];
                const double before = local(a);
                out.slot_of[a] = {j, k};
                if (local(a) < before - eps) {
                    used[j][from.subarray] = 0;
                    used[j][k] = 1;
                    improved = true;
                } else {
                    out.slot_of[a] = from;
                }
            }
        }
        if (!improved) break;
    }
    return out;
}

Binding row_major_bind(const std::vector<int>& counts, const std::vector<LayerLayout>& layouts) {
    check_capacity(counts, layouts);
    Binding out;
    for (std::size_t j = 0; j < counts.size(); ++j) {
        for (int k = 0; k < counts[j]; ++k) out.slot_of.push_back({static_cast<int>(j), k});
    }
    return out;
}

InteractionCost interaction_cost(const Binding& binding, const std::vector<LayerLayout>& layouts,
                                 const DependencyGraph& graph, const ArchSpec& arch) {
    InteractionCost out;
    double weighted_hops = 0;
    double max_cycles = 0;
    for (const auto& e : graph.edges) {
        const auto& sa = subarray_of(layouts, binding.slot_of[e.a]);
        const auto& sb = subarray_of(layouts, binding.slot_of[e.b]);
        EdgeCost c;
        c.a = e.a;
        c.b = e.b;
        c.volume = e.volume;
        c.inter_hops = binding.slot_of[e.a] == binding.slot_of[e.b]
                           ? 0
                           : manhattan(sa.row, sa.col, sb.row, sb.col);
        c.gather_hop_bytes = e.volume / sa.nodes() * spread(sa);
        c.inter_hop_bytes = e.volume * c.inter_hops;
        c.scatter_hop_bytes = e.volume / sb.nodes() * spread(sb);
        out.total_hop_bytes += c.total_hop_bytes();
        out.inter_hop_bytes += c.inter_hop_bytes;
        out.bytes += e.volume;
        weighted_hops += e.volume * c.inter_hops;
        max_cycles = std::max(max_cycles, c.total_hop_bytes() / arch.link_bw);
        out.edges.push_back(c);
    }
    out.avg_hops = out.bytes > 0 ? weighted_hops / out.bytes : 0.0;
    out.event_cycles = static_cast<std::int64_t>(std::ceil(max_cycles - 1e-9));
    return out;
}

int interaction_events(InteractionPattern pattern, int blocks) {
    switch (pattern) {
        case InteractionPattern::none: return 0;
        case InteractionPattern::swin_shift: return blocks / 2;
        case InteractionPattern::ring_all_to_all: return blocks;
    }
    return 0;
}

namespace {

Placement lay_out(const Schedule& schedule, const ModelSpec& model, const ArchSpec& arch) {
    const auto stages = derive_stages(model);
    if (schedule.stages.size() != stages.size()) {
        throw ValidationError("placement: schedule has " + std::to_string(schedule.stages.size()) +
                              " stages, model has " + std::to_string(stages.size()));
    }
    Placement p;
    p.model_name = model.name;
    p.arch_name = arch.name;
    std::map<std::pair<int, int>, LayerLayout> cache;
    for (std::size_t s = 0; s < stages.size(); ++s) {
        StagePlacement sp;
        sp.stage = stages[s].index;
        for (const auto& l : schedule.stages[s].layers) {
            const auto key = std::make_pair(l.choice.u, l.choice.v);
            auto it = cache.find(key);
            if (it == cache.end()) it = cache.emplace(key, structured_layout(arch, key.first, key.second)).first;
            sp.layouts.push_back(it->second);
            sp.counts.push_back(l.choice.count);
        }
        sp.graph = build_dependency_graph(stages[s], model.interaction, model.bytes_per_element);
        sp.events = interaction_events(model.interaction, stages[s].blocks);
        p.stages.push_back(std::move(sp));
    }
    return p;
}

}  // namespace

Placement place(const Schedule& schedule, const ModelSpec& model, const ArchSpec& arch,
                BindStrategy strategy) {
    Placement p = lay_out(schedule, model, arch);
    p.strategy = strategy;
    for (auto& sp : p.stages) {
        sp.binding = strategy == BindStrategy::greedy ? greedy_bind(sp.counts, sp.layouts, sp.graph)
                                                      : row_major_bind(sp.counts, sp.layouts);
        if (static_cast<int>(sp.binding.slot_of.size()) != sp.graph.nodes()) {
            throw ValidationError("placement: stage " + std::to_string(sp.stage) + " schedules " +
                                  std::to_string(sp.binding.slot_of.size()) + " branches, model has " +
                                  std::to_string(sp.graph.nodes()));
        }
        sp.cost = interaction_cost(sp.binding, sp.layouts, sp.graph, arch);
    }
    return p;
}

Placement place_with_binding(const Schedule& schedule, const ModelSpec& model, const ArchSpec& arch,
                             std::string_view placement_json) {
    const json doc = detail::parse_document(placement_json, "placement");
    detail::check_schema_version(doc, 1, "placement");
    Placement p = lay_out(schedule, model, arch);
    p.strategy = parse_bind_strategy(detail::get_or<std::string>(doc, "strategy", "greedy", "placement"));
    const json& stages = detail::require(doc, "stages", "placement");
    if (!stages.is_array() || stages.size() != p.stages.size()) {
        throw ValidationError("placement: stage count does not match the schedule");
    }
    for (std::size_t s = 0; s < p.stages.size(); ++s) {
        auto& sp = p.stages[s];
        const json& binding = detail::require(stages[s], "binding", "placement.stages[]");
        if (!binding.is_array() || static_cast<int>(binding.size()) != sp.graph.nodes()) {
            throw ValidationError("placement: stage " + std::to_string(sp.stage) +
                                  " binding does not cover every branch");
        }
        std::vector<int> filled(sp.layouts.size(), 0);
        std::vector<std::vector<char>> used(sp.layouts.size());
        for (std::size_t j = 0; j < sp.layouts.size(); ++j) used[j].assign(sp.layouts[j].count(), 0);
        for (const auto& b : binding) {
            Slot slot{detail::get<int>(b, "layer", "placement.binding[]"),
                      detail::get<int>(b, "subarray", "placement.binding[]")};
            if (slot.layer < 0 || slot.layer >= static_cast<int>(sp.layouts.size()) || slot.subarray < 0 ||
                slot.subarray >= sp.layouts[slot.layer].count() || used[slot.layer][slot.subarray]) {
                throw ValidationError("placement: stage " + std::to_string(sp.stage) +
                                      " binding does not match the schedule layouts");
            }
            used[slot.layer][slot.subarray] = 1;
            ++filled[slot.layer];
            sp.binding.slot_of.push_back(slot);
        }
        if (filled != sp.counts) {
            throw ValidationError("placement: stage " + std::to_string(sp.stage) +
                                  " binding does not match the schedule branch counts");
        }
        sp.cost = interaction_cost(sp.binding, sp.layouts, sp.graph, arch);
    }
    return p;
}

std::string placement_to_json(const Placement& p) {
    json doc;
    doc["schema_version"] = 1;
    doc["kind"] = "placement";
    doc["model"] = p.model_name;
    doc["arch"] = p.arch_name;
    doc["strategy"] = std::string(to_string(p.strategy));
    json stages = json::array();
    for (const auto& sp : p.stages) {
        json js;
        js["stage"] = sp.stage;
        js["pattern"] = std::string(to_string(sp.graph.pattern));
        js["branch_grid"] = {sp.graph.rows, sp.graph.cols};
        js["edges"] = sp.graph.edges.size();
        json layers = json::array();
        for (std::size_t j = 0; j < sp.layouts.size(); ++j) {
            const auto& l = sp.layouts[j];
            json jl;
            jl["layer"] = j;
            jl["u"] = l.u;
            jl["v"] = l.v;
            jl["count"] = sp.counts[j];
            json subs = json::array();
            for (const auto& sa : l.subarrays) {
                subs.push_back({{"id", sa.id},
                                {"row", sa.row},
                                {"col", sa.col},
                                {"height", sa.height},
                                {"width", sa.width},
                                {"rotated", sa.rotated}});
            }
            jl["subarrays"] = subs;
            layers.push_back(jl);
        }
        js["layers"] = layers;
        json binding = json::array();
        for (std::size_t b = 0; b < sp.binding.slot_of.size(); ++b) {
            binding.push_back({{"branch", b},
                               {"layer", sp.binding.slot_of[b].layer},
                               {"subarray", sp.binding.slot_of[b].subarray}});
        }
        js["binding"] = binding;
        js["interaction"] = {{"events", sp.events},
                             {"bytes_per_event", sp.cost.bytes},
                             {"total_hop_bytes", sp.cost.total_hop_bytes},
                             {"inter_hop_bytes", sp.cost.inter_hop_bytes},
                             {"avg_hops", sp.cost.avg_hops},
                             {"event_cycles", sp.cost.event_cycles}};
        stages.push_back(js);
    }
    doc["stages"] = stages;
    return doc.dump(2) + "\n";
}

std::string render_placement(const Placement& p) {
    std::ostringstream os;
    for (const auto& sp : p.stages) {
        for (std::size_t j = 0; j < sp.layouts.size(); ++j) {
            const auto& l = sp.layouts[j];
            os << "stage " << sp.stage << " layer " << j << " (" << l.u << "x" << l.v << ", "
               << sp.counts[j] << " of " << l.count() << " sub-arrays)\n";
            os << render(l);
            std::vector<int> owner(l.count(), -1);
            for (std::size_t b = 0; b < sp.binding.slot_of.size(); ++b) {
                if (sp.binding.slot_of[b].layer == static_cast<int>(j)) {
                    owner[sp.binding.slot_of[b].subarray] = static_cast<int>(b);
                }
            }
            os << "branches:";
            for (int k = 0; k < l.count(); ++k) {
                if (owner[k] >= 0) os << ' ' << k << "->" << owner[k];
            }
            os << "\n\n";
        }
    }
    return os.str();
}

}  // namespace pimorch
