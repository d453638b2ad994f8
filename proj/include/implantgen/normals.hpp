#pragma once

#include "implantgen/point_cloud.hpp"

namespace implantgen {

/// Per-point unit normals from k-NN PCA (smallest eigenvector of the
/// neighborhood covariance), sign-aligned by propagation along the
/// Euclidean minimum spanning tree, then globally flipped so that the
/// majority of normals point away from the centroid.
PointCloud estimate_normals(const PointCloud& cloud, int k);

}  // namespace implantgen
