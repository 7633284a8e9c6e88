#include <doctest.h>

#include <vector>

#include "pimorch/layout.hpp"
#include "support.hpp"

using namespace pimorch;

namespace {

// True when every sub-array is in bounds, disjoint from the others and mirrored in node_map.
bool consistent(const LayerLayout& l) {
    std::vector<int> owner(static_cast<std::size_t>(l.grid_h) * l.grid_w, -1);
    for (const auto& sa : l.subarrays) {
        if (sa.row < 0 || sa.col < 0 || sa.row + sa.height > l.grid_h || sa.col + sa.width > l.grid_w) return false;
        const bool shape = (!sa.rotated && sa.height == l.u && sa.width == l.v) ||
                           (sa.rotated && sa.height == l.v && sa.width == l.u);
        if (!shape) return false;
        for (int r = sa.row; r < sa.row + sa.height; ++r) {
            for (int c = sa.col; c < sa.col + sa.width; ++c) {
                auto& o = owner[r * l.grid_w + c];
                if (o != -1) return false;
                o = sa.id;
            }
        }
    }
    return owner == l.node_map;
}

}  // namespace

TEST_SUITE("layout") {

TEST_CASE("worked 3x4 example") {
    auto arch = testing::small_arch(3, 4, 1);
    auto l = structured_layout(arch, 2, 1);
    CHECK(l.count() == 6);
    CHECK(render(l) == "0123\n0123\n4455\n");
    CHECK(packing_limit(arch, 2, 1) == 6);
}

TEST_CASE("trivial packings") {
    auto a16 = testing::small_arch(16, 16, 1);
    CHECK(packing_limit(a16, 2, 2) == 64);
    CHECK(packing_limit(a16, 8, 2) == 16);
    CHECK(packing_limit(a16, 17, 1) == 0);
    CHECK(packing_limit(testing::small_arch(5, 5, 1), 5, 5) == 1);
    CHECK(packing_limit(a16, 1, 1) == 256);
}

TEST_CASE("orientation tie keeps the unrotated tiling") {
    auto l = structured_layout(testing::small_arch(4, 4, 1), 2, 1);
    CHECK(l.count() == 8);
    for (const auto& sa : l.subarrays) CHECK_FALSE(sa.rotated);
}

TEST_CASE("disjoint and in bounds on every grid up to 12x12") {
    for (int h = 1; h <= 12; ++h) {
        for (int w = 1; w <= 12; ++w) {
            auto arch = testing::small_arch(h, w, 1);
            const int top = std::max(h, w);
            for (int u = 1; u <= top; ++u) {
                for (int v = 1; v <= top; ++v) {
                    auto l = structured_layout(arch, u, v);
                    REQUIRE(consistent(l));
                    CHECK(l.count() == packing_limit(arch, u, v));
                    CHECK(l.count() * u * v <= h * w);
                    CHECK(packing_limit(arch, u, v) == packing_limit(arch, v, u));
                }
            }
        }
    }
}

TEST_CASE("packing is at least the plain tiling") {
    for (int h = 1; h <= 10; ++h) {
        for (int w = 1; w <= 10; ++w) {
            auto arch = testing::small_arch(h, w, 1);
            for (int u = 1; u <= 10; ++u) {
                for (int v = 1; v <= 10; ++v) {
                    const int plain = std::max((h / u) * (w / v), (h / v) * (w / u));
                    CHECK(packing_limit(arch, u, v) >= plain);
                }
            }
        }
    }
}

}
