#pragma once

#include <vector>

#include "implantgen/voxel_grid.hpp"

namespace implantgen {

/// Per-voxel statistics over an ensemble of binary implants.
struct EnsembleStats {
    int member_count = 0;
    RealGrid mean;           // values in [0,1]
    RealGrid variance;       // population variance, in [0, 0.25]
    BinaryGrid mean_implant; // mean >= 0.5 (ties included)
};

/// Boolean subtraction of the defective from the completed structure,
/// denoised with a 3x3x3 median filter and a radius-1 binary opening.
BinaryGrid generate_implant(const BinaryGrid& completed, const BinaryGrid& defective);

EnsembleStats ensemble_stats(const std::vector<BinaryGrid>& implants);

}  // namespace implantgen
