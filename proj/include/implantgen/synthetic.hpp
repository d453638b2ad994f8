#pragma once

#include <cstdint>
#include <vector>

#include "implantgen/voxel_grid.hpp"

namespace implantgen {

/// Parametric closed shell with a spherical-cap defect carved out of it,
/// standing in for real anatomy at desk scale.
struct PhantomSpec {
    Index3 dims{64, 64, 64};
    Vec3 spacing{1.0, 1.0, 1.0};
    Vec3 radii{14.0, 17.0, 14.0};  // outer semi-axes, voxels
    double thickness = 9.0;        // shell thickness, voxels
    Vec3 defect_direction{0.0, 0.0, 1.0};
    double defect_angle_deg = 40.0;
};

struct PhantomTriple {
    BinaryGrid complete_shape;   // S_c
    BinaryGrid defective_shape;  // S_d
    BinaryGrid implant;          // S_c minus S_d, exact by construction
};

/// Randomization applied per dataset element.
struct DatasetJitter {
    double radii_fraction = 0.10;      // uniform +-10% per axis
    double angle_min_deg = 28.0;
    double angle_max_deg = 45.0;
};

struct DatasetElement {
    PhantomSpec spec;
    PhantomTriple triple;
};

PhantomTriple make_phantom(const PhantomSpec& spec);

/// n independent triples with randomized defect direction/size and mild
/// radii jitter; element i draws from stream i of the seed, so generation
/// order never matters.
std::vector<DatasetElement> make_dataset(int n, const PhantomSpec& base,
                                         const DatasetJitter& jitter, std::uint64_t seed);

}  // namespace implantgen
