#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pimorch/arch.hpp"
#include "pimorch/ilp.hpp"
#include "pimorch/model.hpp"

namespace testing {

inline std::string source_path(const std::string& rel) { return std::string(PIMORCH_SOURCE_DIR) + "/" + rel; }

inline pimorch::ModelSpec fixture_model(const std::string& name) {
    return pimorch::load_model_file(source_path("configs/models/" + name + ".json"));
}

inline pimorch::ArchSpec fixture_arch() { return pimorch::load_arch_file(source_path("configs/arch/pim_16x16.json")); }

inline const std::vector<std::string>& fixture_names() {
    static const std::vector<std::string> names = {"swin_t_224", "swin_s_224", "swin_b_224", "swin_t_640",
                                                   "swin_s_640", "swin_b_640", "vit_b_224"};
    return names;
}

inline pimorch::ArchSpec small_arch(int h, int w, std::int64_t node_cap, int pe = 1) {
    pimorch::ArchSpec a;
    a.name = "small";
    a.grid_h = h;
    a.grid_w = w;
    a.pe_size = pe;
    a.node_cap = node_cap;
    a.local_bw = 16;
    a.flit_bits = 64;
    a.link_bw = 8;
    a.clock_mhz = 400;
    a.e_noc = 1.1;
    a.e_mem = 0.66;
    a.e_mac = 0.2;
    a.p_min = pe;
    return a;
}

inline pimorch::ModelSpec swin_like(int input, int embed, std::vector<int> blocks, int region = 7) {
    pimorch::ModelSpec m;
    m.name = "swin_like";
    m.input_h = m.input_w = input;
    m.patch_size = 4;
    m.embed_dim = embed;
    m.head_dim = 32;
    m.region_h = m.region_w = region;
    m.interaction = pimorch::InteractionPattern::swin_shift;
    for (int b : blocks) m.stages.push_back({b});
    return m;
}

/// Simulates a ring of n nodes: each starts with its own slice of `slice` elements and
/// forwards the slice it holds to its successor every round until all slices are visible
/// everywhere. Returns elements sent by node 0; checks every node sent the same amount.
inline std::int64_t ring_message_count(int n, std::int64_t slice) {
    if (n <= 1) return 0;
    std::vector<int> held(n);
    std::vector<std::set<int>> seen(n);
    std::vector<std::int64_t> sent(n, 0);
    for (int i = 0; i < n; ++i) {
        held[i] = i;
        seen[i].insert(i);
    }
    auto complete = [&] {
        return std::all_of(seen.begin(), seen.end(), [&](const std::set<int>& s) { return static_cast<int>(s.size()) == n; });
    };
    while (!complete()) {
        std::vector<int> next(n);
        for (int i = 0; i < n; ++i) {
            next[(i + 1) % n] = held[i];
            sent[i] += slice;
        }
        held = next;
        for (int i = 0; i < n; ++i) seen[i].insert(held[i]);
    }
    for (int i = 1; i < n; ++i) {
        if (sent[i] != sent[0]) return -1;
    }
    return sent[0];
}

struct Tiny {
    pimorch::IlpInstance inst;
    int branches = 0;
};

// Random instance with at most 6 branches in total and at most 9 candidates per stage.
inline Tiny random_tiny(std::mt19937& rng) {
    static const int regions[] = {4, 8, 16};
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
    for (;;) {
        pimorch::ModelSpec m;
        m.name = "tiny";
        m.patch_size = 4;
        const int res = pick(2) ? 16 : 8;
        m.input_h = m.input_w = 4 * res;
        m.region_h = regions[pick(3)];
        m.region_w = regions[pick(3)];
        m.embed_dim = 32 * (1 + pick(3));
        m.head_dim = 32;
        m.batch = 1 + pick(4);
        m.interaction = pimorch::InteractionPattern::swin_shift;
        const int n_stages = 1 + pick(2);
        for (int s = 0; s < n_stages; ++s) m.stages.push_back({1 + pick(2)});

        int total = 0;
        for (const auto& st : pimorch::derive_stages(m)) total += st.branches;
        if (total > 6) continue;

        const int pe = pick(2) ? 4 : 2;
        auto arch = small_arch(1 + pick(3), 1 + pick(4), 1, pe);
        std::vector<pimorch::Domains> doms;
        for (const auto& st : pimorch::derive_stages(m)) {
            auto d = pimorch::candidate_domains(st, arch);
            auto trim = [](std::vector<int> xs) {
                if (xs.size() > 3) xs = {xs[0], xs[1], xs.back()};
                return xs;
            };
            doms.push_back({trim(d.u), trim(d.v)});
        }
        pimorch::SchedulerOptions o;
        o.reuse = pick(4) != 0;
        o.sharing = pick(4) != 0;
        o.threads = 1;
        // capacity from 1 KiB to 256 KiB on a log scale
        arch.node_cap = static_cast<std::int64_t>(1024.0 * std::pow(2.0, std::uniform_real_distribution<>(0, 8)(rng)));
        return {pimorch::build_ilp(m, arch, o, doms), total};
    }
}

struct BruteForceResult {
    std::optional<std::int64_t> best;
    std::vector<std::vector<pimorch::LayerChoice>> argmin;
    std::int64_t evaluated = 0;
};

/// Every non-increasing layer sequence per stage, each layer on any valid candidate whose
/// packing admits its count.
inline std::vector<std::vector<pimorch::LayerChoice>> stage_sequences(const pimorch::StageTable& t) {
    std::vector<std::vector<pimorch::LayerChoice>> out;
    std::vector<pimorch::LayerChoice> cur;
    std::function<void(int, int)> rec = [&](int rem, int cap) {
        if (rem == 0) {
            out.push_back(cur);
            return;
        }
        for (int c = std::min(rem, cap); c >= 1; --c) {
            for (const auto& e : t.entries) {
                if (!e.valid || e.packing < c) continue;
                cur.push_back({c, e.u, e.v});
                rec(rem - c, c);
                cur.pop_back();
            }
        }
    };
    rec(t.stage.branches, t.stage.branches);
    return out;
}

/// Exhaustive optimum over all schedules that fit the node memory.
inline BruteForceResult brute_force(const pimorch::IlpInstance& inst) {
    std::vector<std::vector<std::vector<pimorch::LayerChoice>>> per_stage;
    for (const auto& t : inst.stages) per_stage.push_back(stage_sequences(t));
    BruteForceResult r;
    std::vector<std::vector<pimorch::LayerChoice>> pick(per_stage.size());
    std::function<void(std::size_t)> rec = [&](std::size_t s) {
        if (s == per_stage.size()) {
            auto sched = pimorch::evaluate_schedule(inst, pick);
            ++r.evaluated;
            if (sched.memory.total() > static_cast<double>(inst.arch.node_cap)) return;
            if (!r.best || sched.objective < *r.best) {
                r.best = sched.objective;
                r.argmin = pick;
            }
            return;
        }
        for (const auto& seq : per_stage[s]) {
            pick[s] = seq;
            rec(s + 1);
        }
    };
    rec(0);
    return r;
}

}  // namespace testing
