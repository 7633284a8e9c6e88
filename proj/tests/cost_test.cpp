#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pimorch/cost.hpp"
#include "pimorch/errors.hpp"
#include "support.hpp"

using namespace pimorch;

namespace {

CostParams params8() {
    CostParams p;
    p.pe = 8;
    p.local_bw = 16;
    p.link_bw = 8;
    p.e_noc = 1.1;
    p.e_mem = 0.66;
    p.e_mac = 0.2;
    return p;
}

std::int64_t cdiv(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

// Roofline GeMM written out directly.
std::int64_t ref_gemm(std::int64_t m, std::int64_t k, std::int64_t n, const CostParams& p) {
    std::int64_t comp = cdiv(m, p.pe) * cdiv(n, p.pe) * k;
    std::int64_t mem = cdiv((m * k + k * n + m * n) * p.bytes_per_element, static_cast<std::int64_t>(p.local_bw));
    return std::max(comp, mem);
}

}  // namespace

TEST_SUITE("cost") {

TEST_CASE("gemm compute term") {
    auto p = params8();
    CHECK(gemm_compute_cycles({8, 8, 8}, p) == 8);
    CHECK(gemm_compute_cycles({13, 512, 128}, p) == 2 * 16 * 512);
    CHECK(gemm_cycles({13, 512, 128}, p) == 16384);
    auto one = params8();
    one.pe = 1;
    CHECK(gemm_compute_cycles({1, 1, 1}, one) == 1);
    auto fd = params8();
    fd.model = UtilizationModel::fill_drain;
    CHECK(gemm_compute_cycles({8, 8, 8}, fd) == 8 + 7);
}

TEST_CASE("gemm is memory bound for skinny shapes") {
    auto p = params8();
    // 64 x 1 x 64: 64 tiles of k=1 vs (64 + 64 + 4096) / 16 bytes/cycle
    CHECK(gemm_compute_cycles({64, 1, 64}, p) == 64);
    CHECK(gemm_cycles({64, 1, 64}, p) == 264);
}

TEST_CASE("acu latencies are linear") {
    auto p = params8();
    PhaseDescriptor sm;
    sm.acu = AcuOp::softmax_row;
    sm.acu_units = 13;
    CHECK(acu_cycles(sm, p) == 208);
    PhaseDescriptor ln;
    ln.acu = AcuOp::layernorm_row;
    ln.acu_units = 0;
    CHECK(acu_cycles(ln, p) == 0);
    PhaseDescriptor gelu;
    gelu.acu = AcuOp::gelu_elem;
    gelu.acu_units = 13 * 4 * 128;
    p.acu.gelu_elem = 1.0;
    CHECK(acu_cycles(gelu, p) == 13 * 4 * 128);
    sm.repeat = 4;
    CHECK(acu_cycles(sm, params8()) == 4 * 208);
}

TEST_CASE("transfer cycles round up") {
    auto p = params8();
    CHECK(transfer_cycles(0, p) == 0);
    CHECK(transfer_cycles(4992, p) == 624);
    CHECK(transfer_cycles(1, p) == 1);
    CHECK(transfer_cycles(9, p) == 2);
}

TEST_CASE("energy constants") {
    auto p = params8();
    CHECK(energy({}, p).total_pj() == 0);
    CHECK(energy({64, 0, 0}, p).noc_pj == doctest::Approx(70.4));
    CHECK(energy({0, 8.0 * 1024 * 1024, 0}, p).mem_pj == doctest::Approx(8.0 * 1024 * 1024 * 0.66));
    CHECK(energy({0, 0, 1000}, p).mac_pj == doctest::Approx(200));
}

TEST_CASE("single-node layer equals a hand-written block") {
    auto arch = testing::fixture_arch();
    auto m = testing::swin_like(224, 96, {2, 2});
    auto stages = derive_stages(m);
    auto p = CostParams::from(arch, 1);
    for (const auto& st : stages) {
        auto c = build_candidate(m, st, arch, 1, 1);
        const std::int64_t N = st.region_patches, C = st.channels, d = st.head_dim, h = st.heads;
        std::int64_t block = 0;
        block += 2 * N * 16;                             // two layernorms
        block += ref_gemm(N, C, 3 * C, p);               // qkv
        block += h * ref_gemm(N, d, N, p);               // scores
        block += h * N * 16;                             // softmax
        block += h * ref_gemm(N, N, d, p);               // context
        block += ref_gemm(N, C, C, p);                   // projection
        block += ref_gemm(N, C, 4 * C, p);               // fc1
        block += static_cast<std::int64_t>(std::ceil(N * 4 * C * 0.125));
        block += ref_gemm(N, 4 * C, C, p);               // fc2
        std::int64_t expect = st.blocks * block;
        if (st.index >= 2) expect += ref_gemm(N, 2 * C, C, p);

        auto lc = layer_cost(c, st.blocks, p, true);
        CHECK(lc.compute == expect);
        CHECK(lc.transfer == 0);
        CHECK(lc.weight_share == 0);
    }
}

TEST_CASE("sharing only adds weight traffic") {
    auto arch = testing::fixture_arch();
    auto m = testing::swin_like(640, 128, {2, 2, 18, 2});
    auto st = derive_stages(m)[2];
    auto p = CostParams::from(arch, 1);
    auto c = build_candidate(m, st, arch, 4, 4);
    auto with = layer_cost(c, st.blocks, p, true);
    auto without = layer_cost(c, st.blocks, p, false);
    CHECK(with.compute == without.compute);
    CHECK(with.transfer == without.transfer);
    CHECK(without.weight_share == 0);
    CHECK(with.weight_share > 0);
    CHECK(with.total(4) == 4 * (with.compute + with.transfer) + with.weight_share);
}

TEST_CASE("memory bytes touched per phase") {
    PhaseDescriptor ph;
    ph.gemm = GemmDims{2, 3, 4};
    ph.repeat = 2;
    CHECK(phase_memory_bytes(ph, 1) == 2 * (6 + 12 + 8));
    ph.acu = AcuOp::gelu_elem;
    ph.acu_units = 8;
    CHECK(phase_memory_bytes(ph, 2) == 2 * 2 * (6 + 12 + 8) + 2 * 2 * 8 * 2);
}

TEST_CASE("utilization model names") {
    CHECK(parse_utilization_model("ideal") == UtilizationModel::ideal);
    CHECK(parse_utilization_model("fill_drain") == UtilizationModel::fill_drain);
    CHECK_THROWS_AS(parse_utilization_model("magic"), ConfigError);
}

}
