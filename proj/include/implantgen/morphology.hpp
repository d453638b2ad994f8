#pragma once

#include <vector>

#include "implantgen/voxel_grid.hpp"

namespace implantgen {

namespace detail {

/// Offsets of the 6-connected discrete ball: all |dx|+|dy|+|dz| <= radius.
inline std::vector<Index3> manhattan_ball(int radius) {
    std::vector<Index3> offsets;
    for (int dz = -radius; dz <= radius; ++dz)
        for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx)
                if (std::abs(dx) + std::abs(dy) + std::abs(dz) <= radius)
                    offsets.emplace_back(dx, dy, dz);
    return offsets;
}

}  // namespace detail

/// Majority vote over the 3x3x3 neighborhood; out-of-bounds counts as 0.
inline BinaryGrid median_filter3(const BinaryGrid& grid) {
    require_binary(grid, "median_filter3");
    BinaryGrid out(grid.dims, grid.spacing);
    for (int z = 0; z < grid.dims.z(); ++z)
        for (int y = 0; y < grid.dims.y(); ++y)
            for (int x = 0; x < grid.dims.x(); ++x) {
                int ones = 0;
                for (int dz = -1; dz <= 1; ++dz)
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx)
                            ones += grid.at_or_zero(x + dx, y + dy, z + dz);
                out.at(x, y, z) = ones >= 14 ? 1 : 0;  // majority of 27
            }
    return out;
}

inline BinaryGrid erode(const BinaryGrid& grid, int radius) {
    const auto se = detail::manhattan_ball(radius);
    BinaryGrid out(grid.dims, grid.spacing);
    for (int z = 0; z < grid.dims.z(); ++z)
        for (int y = 0; y < grid.dims.y(); ++y)
            for (int x = 0; x < grid.dims.x(); ++x) {
                std::uint8_t v = 1;
                for (const auto& o : se)
                    if (grid.at_or_zero(x + o.x(), y + o.y(), z + o.z()) == 0) {
                        v = 0;
                        break;
                    }
                out.at(x, y, z) = v;
            }
    return out;
}

inline BinaryGrid dilate(const BinaryGrid& grid, int radius) {
    const auto se = detail::manhattan_ball(radius);
    BinaryGrid out(grid.dims, grid.spacing);
    for (int z = 0; z < grid.dims.z(); ++z)
        for (int y = 0; y < grid.dims.y(); ++y)
            for (int x = 0; x < grid.dims.x(); ++x) {
                std::uint8_t v = 0;
                for (const auto& o : se)
                    if (grid.at_or_zero(x + o.x(), y + o.y(), z + o.z()) == 1) {
                        v = 1;
                        break;
                    }
                out.at(x, y, z) = v;
            }
    return out;
}

/// Erosion followed by dilation with a 6-connected ball; result is a
/// subset of the input.
inline BinaryGrid binary_opening(const BinaryGrid& grid, int radius_voxels) {
    require_binary(grid, "binary_opening");
    if (radius_voxels <= 0) throw UserError("binary_opening: radius must be positive");
    return dilate(erode(grid, radius_voxels), radius_voxels);
}

}  // namespace implantgen
