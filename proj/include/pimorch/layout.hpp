/**
 * @file layout.hpp
 * @brief Structured layout of uniformly-sized sub-arrays on the PIM-node grid.
 *
 * For a u x v sub-array the grid is tiled in both orientations (u x v and the
 * rotated v x u); each tiling fills a primary x1 * y1 block and then packs rotated
 * sub-arrays into the leftover strip. The orientation with more sub-arrays wins,
 * ties going to the unrotated one.
 */
#pragma once

#include <string>
#include <vector>

#include "pimorch/arch.hpp"

namespace pimorch {

struct SubArray {
    int id = 0;
    int row = 0;     ///< top-left node row
    int col = 0;     ///< top-left node column
    int height = 0;
    int width = 0;
    bool rotated = false;  ///< true when placed as v x u

    int nodes() const { return height * width; }
};

struct LayerLayout {
    int u = 1;
    int v = 1;
    int grid_h = 0;
    int grid_w = 0;
    std::vector<SubArray> subarrays;
    std::vector<int> node_map;  ///< grid_h * grid_w, sub-array id or -1

    int at(int row, int col) const { return node_map[row * grid_w + col]; }
    int count() const { return static_cast<int>(subarrays.size()); }
};

LayerLayout structured_layout(const ArchSpec& arch, int u, int v);

/// N_{alpha,beta}: number of u x v sub-arrays the structured layout packs.
int packing_limit(const ArchSpec& arch, int u, int v);

/// Plain-text rendering, one character cell per node ('.' for unoccupied).
std::string render(const LayerLayout& layout);

}  // namespace pimorch
