#include <doctest.h>

#include <set>

#include "pimorch/errors.hpp"
#include "pimorch/layout.hpp"
#include "pimorch/placement.hpp"
#include "support.hpp"

using namespace pimorch;

namespace {

StageSpec grid_stage(int rows, int cols) {
    StageSpec s;
    s.index = 1;
    s.blocks = 2;
    s.channels = 96;
    s.branch_rows = rows;
    s.branch_cols = cols;
    s.branches = rows * cols;
    s.region_h = s.region_w = 7;
    s.region_patches = 49;
    s.heads = 3;
    s.head_dim = 32;
    return s;
}

// Counts unordered neighbour pairs (right, down, down-right) by scanning all pairs of cells.
int neighbour_pairs(int rows, int cols) {
    int n = 0;
    for (int a = 0; a < rows * cols; ++a) {
        for (int b = a + 1; b < rows * cols; ++b) {
            const int dr = b / cols - a / cols, dc = b % cols - a % cols;
            if ((dr == 0 && dc == 1) || (dr == 1 && dc == 0) || (dr == 1 && dc == 1)) ++n;
        }
    }
    return n;
}

LayerLayout unit_layout(int h, int w, const std::vector<std::pair<int, int>>& corners) {
    LayerLayout l;
    l.grid_h = h;
    l.grid_w = w;
    l.node_map.assign(static_cast<std::size_t>(h) * w, -1);
    for (std::size_t i = 0; i < corners.size(); ++i) {
        l.subarrays.push_back({static_cast<int>(i), corners[i].first, corners[i].second, 1, 1, false});
        l.node_map[corners[i].first * w + corners[i].second] = static_cast<int>(i);
    }
    return l;
}

Placement solved_placement(const std::string& name, BindStrategy strategy) {
    auto m = testing::fixture_model(name);
    auto inst = build_ilp(m, testing::fixture_arch(), {});
    return place(solve(inst), m, testing::fixture_arch(), strategy);
}

}  // namespace

TEST_SUITE("placement") {

TEST_CASE("shifted-window edge count matches neighbour enumeration") {
    for (int r = 1; r <= 9; ++r) {
        for (int c = 1; c <= 9; ++c) {
            auto g = build_dependency_graph(grid_stage(r, c), InteractionPattern::swin_shift, 1);
            CHECK(static_cast<int>(g.edges.size()) == neighbour_pairs(r, c));
            for (const auto& e : g.edges) {
                CHECK(e.a != e.b);
                CHECK(e.volume > 0);
            }
        }
    }
    CHECK(build_dependency_graph(grid_stage(3, 3), InteractionPattern::swin_shift, 1).edges.size() == 16);
}

TEST_CASE("ring and empty patterns") {
    CHECK(build_dependency_graph(grid_stage(1, 5), InteractionPattern::ring_all_to_all, 1).edges.size() == 5);
    CHECK(build_dependency_graph(grid_stage(1, 2), InteractionPattern::ring_all_to_all, 1).edges.size() == 1);
    CHECK(build_dependency_graph(grid_stage(1, 1), InteractionPattern::ring_all_to_all, 1).edges.empty());
    CHECK(build_dependency_graph(grid_stage(1, 1), InteractionPattern::swin_shift, 1).edges.empty());
    CHECK(build_dependency_graph(grid_stage(4, 4), InteractionPattern::none, 1).edges.empty());
}

TEST_CASE("edge volumes") {
    auto g = build_dependency_graph(grid_stage(2, 2), InteractionPattern::swin_shift, 2, 1.5);
    std::set<double> vols;
    for (const auto& e : g.edges) vols.insert(e.volume);
    CHECK(vols == std::set<double>{96 * 2 * 1.5, 7 * 96 * 2 * 1.5});
}

TEST_CASE("single branch seeds the top-left sub-array") {
    auto layout = structured_layout(testing::fixture_arch(), 2, 2);
    auto b = greedy_bind({1}, {layout}, build_dependency_graph(grid_stage(1, 1), InteractionPattern::swin_shift, 1));
    REQUIRE(b.slot_of.size() == 1);
    CHECK(b.slot_of[0] == Slot{0, 0});
}

TEST_CASE("greedy picks the closest slot") {
    // slot 1 is 5 hops from the seed, slot 2 is 2 hops
    auto layout = unit_layout(4, 4, {{0, 0}, {2, 3}, {0, 2}});
    auto g = build_dependency_graph(grid_stage(1, 2), InteractionPattern::ring_all_to_all, 1);
    auto b = greedy_bind({2}, {layout}, g);
    CHECK(b.slot_of[1] == Slot{0, 2});
}

TEST_CASE("empty graph fills slots in id order") {
    auto layout = structured_layout(testing::small_arch(4, 4, 1), 1, 1);
    auto g = build_dependency_graph(grid_stage(2, 3), InteractionPattern::none, 1);
    auto b = greedy_bind({6}, {layout}, g);
    for (int i = 0; i < 6; ++i) CHECK(b.slot_of[i] == Slot{0, i});
}

TEST_CASE("binding is a bijection onto the scheduled slots") {
    auto p = solved_placement("swin_b_640", BindStrategy::greedy);
    for (const auto& sp : p.stages) {
        std::set<std::pair<int, int>> seen;
        std::vector<int> per_layer(sp.counts.size(), 0);
        for (const auto& s : sp.binding.slot_of) {
            REQUIRE(s.layer >= 0);
            CHECK(s.subarray < sp.layouts[s.layer].count());
            CHECK(seen.insert({s.layer, s.subarray}).second);
            ++per_layer[s.layer];
        }
        CHECK(per_layer == sp.counts);
        CHECK(static_cast<int>(sp.binding.slot_of.size()) == sp.graph.nodes());
    }
}

TEST_CASE("interaction distances") {
    auto layout = unit_layout(4, 4, {{0, 0}, {2, 3}});
    auto g = build_dependency_graph(grid_stage(1, 2), InteractionPattern::ring_all_to_all, 1);
    auto arch = testing::small_arch(4, 4, 1);
    auto c = interaction_cost(Binding{{{0, 0}, {0, 1}}}, {layout}, g, arch);
    REQUIRE(c.edges.size() == 1);
    CHECK(c.edges[0].inter_hops == 5);
    CHECK(c.avg_hops == doctest::Approx(5.0));
    // 1x1 sub-arrays: no gather or scatter hops
    CHECK(c.total_hop_bytes == doctest::Approx(5.0 * g.edges[0].volume));

    // same position on two layers
    auto c2 = interaction_cost(Binding{{{0, 0}, {1, 0}}}, {layout, layout}, g, arch);
    CHECK(c2.edges[0].inter_hops == 0);
}

TEST_CASE("gather and scatter use the per-node share") {
    auto layout = structured_layout(testing::small_arch(2, 4, 1), 2, 2);
    auto g = build_dependency_graph(grid_stage(1, 2), InteractionPattern::ring_all_to_all, 1);
    auto c = interaction_cost(Binding{{{0, 0}, {0, 1}}}, {layout}, g, testing::small_arch(2, 4, 1));
    // 2x2 block: distances 0,1,1,2 from the corner
    const double vol = g.edges[0].volume;
    CHECK(c.edges[0].gather_hop_bytes == doctest::Approx(vol / 4 * 4));
    CHECK(c.edges[0].scatter_hop_bytes == doctest::Approx(vol / 4 * 4));
    CHECK(c.edges[0].inter_hops == 2);
}

TEST_CASE("interaction events per stage") {
    CHECK(interaction_events(InteractionPattern::swin_shift, 18) == 9);
    CHECK(interaction_events(InteractionPattern::ring_all_to_all, 4) == 4);
    CHECK(interaction_events(InteractionPattern::none, 12) == 0);
}

TEST_CASE("greedy beats row-major over each swin fixture") {
    for (const auto& name : testing::fixture_names()) {
        if (name.rfind("swin", 0) != 0) continue;
        auto g = solved_placement(name, BindStrategy::greedy);
        auto r = solved_placement(name, BindStrategy::row_major);
        double gt = 0, rt = 0;
        for (std::size_t s = 0; s < g.stages.size(); ++s) {
            gt += g.stages[s].cost.total_hop_bytes;
            rt += r.stages[s].cost.total_hop_bytes;
        }
        CHECK_MESSAGE(gt <= rt, name);
    }
}

TEST_CASE("square branch grid keeps square slots") {
    // 4x4 branches on 4x4 sub-arrays of a 16x16 grid: the shape of the region grid is reproduced
    auto g = solved_placement("swin_b_224", BindStrategy::greedy);
    auto r = solved_placement("swin_b_224", BindStrategy::row_major);
    CHECK(g.stages[1].cost.total_hop_bytes <= r.stages[1].cost.total_hop_bytes);
}

TEST_CASE("placement is deterministic and round trips") {
    auto m = testing::fixture_model("swin_t_640");
    auto inst = build_ilp(m, testing::fixture_arch(), {});
    auto s = solve(inst);
    const std::string first = placement_to_json(place(s, m, testing::fixture_arch()));
    for (int i = 0; i < 3; ++i) CHECK(placement_to_json(place(s, m, testing::fixture_arch())) == first);
    auto back = place_with_binding(s, m, testing::fixture_arch(), first);
    CHECK(placement_to_json(back) == first);
}

TEST_CASE("capacity mismatch is rejected") {
    auto layout = structured_layout(testing::small_arch(2, 2, 1), 1, 1);
    auto g = build_dependency_graph(grid_stage(1, 5), InteractionPattern::none, 1);
    CHECK_THROWS_AS(greedy_bind({5}, {layout}, g), ValidationError);
    CHECK_THROWS_AS(parse_bind_strategy("random"), ConfigError);
}

}
