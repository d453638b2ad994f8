#pragma once

#include <vector>

#include "implantgen/voxel_grid.hpp"

namespace implantgen {

struct MetricReport {
    double dsc = 0.0;
    double bdsc = 0.0;
    double hd95 = 0.0;  // mm
    double tolerance_mm = 10.0;
};

/// Dice overlap 2|A n B| / (|A| + |B|); undefined (error) when both empty.
double dsc(const BinaryGrid& a, const BinaryGrid& b);

/// Foreground voxels with a 6-neighbor background voxel or a volume edge.
std::vector<Index3> boundary_voxels(const BinaryGrid& mask);

/// Symmetric surface Dice at a physical tolerance:
/// (matched_A + matched_B) / (|bA| + |bB|), where a boundary voxel matches
/// when some boundary voxel of the other mask lies within tolerance_mm.
double boundary_dsc(const BinaryGrid& a, const BinaryGrid& b, double tolerance_mm);

/// 95th percentile (linear interpolation between order statistics) of the
/// pooled directed boundary-to-boundary nearest distances, in mm.
double hd95(const BinaryGrid& a, const BinaryGrid& b);

MetricReport evaluate(const BinaryGrid& pred, const BinaryGrid& truth, double tolerance_mm = 10.0);

}  // namespace implantgen
