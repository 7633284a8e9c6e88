#include <doctest.h>

#include "pimorch/errors.hpp"
#include "pimorch/partition.hpp"
#include "support.hpp"

using namespace pimorch;

namespace {

StageSpec make_stage(int index, std::int64_t channels, int head_dim, int n_patches) {
    StageSpec s;
    s.index = index;
    s.blocks = 1;
    s.channels = channels;
    s.heads = static_cast<int>(channels / head_dim);
    s.head_dim = head_dim;
    s.region_h = n_patches;
    s.region_w = 1;
    s.region_patches = n_patches;
    s.branches = 1;
    s.branch_rows = s.branch_cols = 1;
    return s;
}

ModelSpec plain_model() {
    auto m = testing::swin_like(224, 96, {1, 1});
    return m;
}

}  // namespace

TEST_SUITE("partition") {

TEST_CASE("candidate domains") {
    auto arch = testing::fixture_arch();
    arch.p_min = 8;
    CHECK(candidate_domains(make_stage(1, 128, 32, 49), arch).u == std::vector<int>{1, 2, 4});
    CHECK(candidate_domains(make_stage(1, 128, 32, 49), arch).v == std::vector<int>{1, 2, 3, 4, 7});
    CHECK(candidate_domains(make_stage(1, 32, 32, 49), arch).u == std::vector<int>{1});
    CHECK(candidate_domains(make_stage(1, 512, 32, 49), arch).u ==
          std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 16});
}

TEST_CASE("tile sizes and closed-form volumes") {
    auto arch = testing::fixture_arch();
    auto m = plain_model();
    auto c = build_candidate(m, make_stage(3, 512, 32, 49), arch, 4, 4);
    CHECK(c.p == 13);
    CHECK(c.q == 128);
    CHECK(c.b == 4);
    CHECK(c.volumes.k == 3 * 13 * 128);
    CHECK(c.volumes.k == 4992);

    auto c2 = build_candidate(m, make_stage(3, 512, 32, 26), arch, 2, 2);
    CHECK(c2.p == 13);
    CHECK(c2.q == 256);
    CHECK(c2.volumes.ffn == 16640);

    auto c1 = build_candidate(m, make_stage(3, 512, 32, 49), arch, 1, 1);
    CHECK(c1.volumes.f == 0);
    CHECK(c1.volumes.k == 0);
    CHECK(c1.volumes.v == 0);
    CHECK(c1.volumes.msa_fc == 0);
    CHECK(c1.volumes.ffn == 0);
    CHECK(c1.volumes.ln == 0);
    CHECK(c1.volumes.pm == 0);
    for (const auto& ph : phase_plan(c1)) CHECK(ph.transfer_bytes == 0);
}

TEST_CASE("ring oracle examples") {
    CHECK(testing::ring_message_count(4, 13 * 32) * 4 == 4992);
    CHECK(testing::ring_message_count(1, 100) == 0);
    CHECK(testing::ring_message_count(3, 5 * 7) == 70);
}

TEST_CASE("closed forms equal the message-counting oracle") {
    auto arch = testing::fixture_arch();
    auto m = plain_model();
    for (int u = 1; u <= 8; ++u) {
        for (int v = 1; v <= 8; ++v) {
            for (int n : {1, 7, 13, 49, 64}) {
                for (std::int64_t C : {64, 96, 256, 1024}) {
                    auto st = make_stage(2, C, 32, n);
                    if (!candidate_shape_ok(st, arch, u, v)) continue;
                    auto c = build_candidate(m, st, arch, u, v);
                    const std::int64_t p = (n + u - 1) / u;
                    const std::int64_t b = (st.heads + v - 1) / v;
                    const std::int64_t q = b * 32;
                    REQUIRE(c.p == p);
                    REQUIRE(c.q == q);
                    std::int64_t k = 0;
                    for (int h = 0; h < b; ++h) k += testing::ring_message_count(u, p * 32);
                    CHECK(c.volumes.f == testing::ring_message_count(u, p * q));
                    CHECK(c.volumes.k == k);
                    CHECK(c.volumes.v == k);
                    CHECK(c.volumes.msa_fc == testing::ring_message_count(v, p * q));
                    CHECK(c.volumes.ffn == testing::ring_message_count(v, p * q) +
                                               testing::ring_message_count(v, p * 4 * q));
                    CHECK(c.volumes.ln == testing::ring_message_count(v, 2 * p));
                    CHECK(c.volumes.pm == testing::ring_message_count(v, p * 2 * q));
                }
            }
        }
    }
}

TEST_CASE("phase plan structure") {
    auto arch = testing::fixture_arch();
    auto m = plain_model();
    auto c = build_candidate(m, make_stage(2, 512, 32, 49), arch, 2, 4);
    REQUIRE(c.b == 4);
    auto plan = phase_plan(c);
    REQUIRE(plan.size() == 9);
    CHECK(plan[0].id == PhaseId::layernorm1);
    CHECK(plan[8].id == PhaseId::ffn_fc2);
    CHECK(plan[static_cast<int>(PhaseId::scores) - 1].repeat == 4);
    CHECK(plan[static_cast<int>(PhaseId::softmax) - 1].repeat == 4);
    CHECK(plan[static_cast<int>(PhaseId::context) - 1].repeat == 4);
    CHECK(plan[static_cast<int>(PhaseId::qkv) - 1].direction == Direction::vertical);
    CHECK(plan[static_cast<int>(PhaseId::msa_fc) - 1].direction == Direction::horizontal);

    std::int64_t transfer = 0;
    double share = 0;
    for (const auto& ph : plan) {
        transfer += ph.transfer_bytes;
        share += ph.weight_share_bytes;
    }
    const auto& vol = c.volumes;
    CHECK(transfer == vol.f + vol.k + vol.v + vol.msa_fc + vol.ffn + 2 * vol.ln);
    CHECK(share == doctest::Approx(c.weights.share_msa + c.weights.share_fc + c.weights.share_ffn));

    auto pm = patch_merge_phase(c);
    REQUIRE(pm.has_value());
    CHECK(pm->transfer_bytes == vol.pm);
    CHECK_FALSE(patch_merge_phase(build_candidate(m, make_stage(1, 512, 32, 49), arch, 2, 4)).has_value());
}

TEST_CASE("qkv workspace dominates the score phase") {
    auto arch = testing::fixture_arch();
    auto m = plain_model();
    for (int u = 1; u <= 8; ++u) {
        for (int v = 1; v <= 8; ++v) {
            for (int n : {16, 49, 64}) {
                auto st = make_stage(2, 256, 32, n);
                if (!candidate_shape_ok(st, arch, u, v)) continue;
                auto c = build_candidate(m, st, arch, u, v);
                CHECK(c.workspace[2] >= c.workspace[3]);
                CHECK(c.workspace_peak() >= c.workspace[2]);
            }
        }
    }
}

TEST_CASE("weights are split over the sub-array and shared within a column") {
    auto arch = testing::fixture_arch();
    auto m = plain_model();
    auto st = make_stage(2, 256, 32, 49);
    auto c = build_candidate(m, st, arch, 4, 2);
    CHECK(c.weights.stored_per_node == doctest::Approx(12.0 * 256 * 256 / 8));
    CHECK(c.weights.pm_stored_per_node == doctest::Approx(2.0 * 256 * 256 / 8));
    CHECK(c.weights.share_msa == doctest::Approx(0.75 * 3 * 256 * c.q));
    CHECK(c.weights.share_fc == doctest::Approx(0.75 * 256 * c.q));
    CHECK(c.weights.share_ffn == doctest::Approx(0.75 * 8 * 256 * c.q));
    auto single = build_candidate(m, st, arch, 1, 2);
    CHECK(single.weights.share_msa == 0);
}

TEST_CASE("infeasible shapes") {
    auto arch = testing::small_arch(2, 2, 1 << 20);
    auto m = plain_model();
    auto st = make_stage(1, 64, 32, 16);
    CHECK_FALSE(candidate_shape_ok(st, arch, 3, 2));
    CHECK_THROWS_AS(build_candidate(m, st, arch, 3, 2), ValidationError);
    CHECK_FALSE(candidate_shape_ok(st, arch, 1, 3));
    CHECK_THROWS_AS(build_candidate(m, st, arch, 1, 3), ValidationError);
    CHECK(candidate_shape_ok(st, arch, 2, 2));
}

}
