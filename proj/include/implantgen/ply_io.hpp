#pragma once

#include <string>

#include "implantgen/mesh.hpp"
#include "implantgen/point_cloud.hpp"

namespace implantgen {

/// ASCII PLY, full double precision (17 significant digits round-trips
/// exactly). Point clouds carry a `comment split N` line and optional
/// nx,ny,nz properties.

void write_mesh_ply(const TriMesh& mesh, const std::string& path);
TriMesh read_mesh_ply(const std::string& path);

void write_cloud_ply(const PointCloud& cloud, const std::string& path);
PointCloud read_cloud_ply(const std::string& path);

}  // namespace implantgen
