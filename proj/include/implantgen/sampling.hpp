#pragma once

#include <cstdint>

#include "implantgen/mesh.hpp"
#include "implantgen/point_cloud.hpp"

namespace implantgen {

/// Area-weighted uniform random points on the mesh surface.
PointCloud uniform_surface_sample(const TriMesh& mesh, Eigen::Index count, std::uint64_t seed);

/// Blue-noise surface sampling: draws a 4x oversampled area-weighted
/// candidate set, then runs weighted sample elimination (weights
/// (1 - d / (2 r_max))^8 with r_max from the target density) down to
/// exactly `count` points.
PointCloud poisson_disk_sample(const TriMesh& mesh, Eigen::Index count, std::uint64_t seed);

}  // namespace implantgen
