#include "pimorch/layout.hpp"

#include <sstream>

namespace pimorch {

namespace {

struct Tiling {
    int count = 0;
    std::vector<SubArray> subarrays;
};

// Tiles an A x B grid with a x b sub-arrays (a rows, b columns), then fills the
// leftover strip with b x a ones. `rotated` marks sub-arrays that end up v x u.
Tiling struct_layout(int A, int B, int a, int b, bool primary_rotated) {
    Tiling t;
    const int x1 = A / a;
    const int y1 = B / b;
    for (int i = 0; i < x1; ++i) {
        for (int j = 0; j < y1; ++j) {
            t.subarrays.push_back({0, i * a, j * b, a, b, primary_rotated});
        }
    }
    if (a > b) {
        const int rest_rows = A - x1 * a;
        const int x2 = rest_rows / b;
        const int y2 = B / a;
        for (int i = 0; i < x2; ++i) {
            for (int j = 0; j < y2; ++j) {
                t.subarrays.push_back({0, x1 * a + i * b, j * a, b, a, !primary_rotated});
            }
        }
    } else {
        const int rest_cols = B - y1 * b;
        const int x2 = rest_cols / a;
        const int y2 = A / b;
        for (int j = 0; j < y2; ++j) {
            for (int i = 0; i < x2; ++i) {
                t.subarrays.push_back({0, j * b, y1 * b + i * a, b, a, !primary_rotated});
            }
        }
    }
    t.count = static_cast<int>(t.subarrays.size());
    return t;
}

}  // namespace

LayerLayout structured_layout(const ArchSpec& arch, int u, int v) {
    LayerLayout out;
    out.u = u;
    out.v = v;
    out.grid_h = arch.grid_h;
    out.grid_w = arch.grid_w;
    out.node_map.assign(static_cast<std::size_t>(arch.grid_h) * arch.grid_w, -1);
    if (u < 1 || v < 1) return out;

    Tiling x = struct_layout(arch.grid_h, arch.grid_w, u, v, false);
    Tiling y = struct_layout(arch.grid_h, arch.grid_w, v, u, true);
    Tiling& best = x.count >= y.count ? x : y;

    out.subarrays = std::move(best.subarrays);
    for (std::size_t id = 0; id < out.subarrays.size(); ++id) {
        auto& sa = out.subarrays[id];
        sa.id = static_cast<int>(id);
        for (int r = sa.row; r < sa.row + sa.height; ++r) {
            for (int c = sa.col; c < sa.col + sa.width; ++c) {
                out.node_map[r * out.grid_w + c] = sa.id;
            }
        }
    }
    return out;
}

int packing_limit(const ArchSpec& arch, int u, int v) {
    if (u < 1 || v < 1) return 0;
    return structured_layout(arch, u, v).count();
}

std::string render(const LayerLayout& layout) {
    static constexpr char kSymbols[] =
        "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
    constexpr int kN = sizeof(kSymbols) - 1;
    std::ostringstream os;
    for (int r = 0; r < layout.grid_h; ++r) {
        for (int c = 0; c < layout.grid_w; ++c) {
            const int id = layout.at(r, c);
            os << (id < 0 ? '.' : kSymbols[id % kN]);
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace pimorch
