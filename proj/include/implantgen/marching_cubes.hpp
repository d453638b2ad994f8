#pragma once

#include "implantgen/mesh.hpp"
#include "implantgen/voxel_grid.hpp"

namespace implantgen {

/// Extracts the iso-level surface of a binary grid as a triangle mesh.
///
/// Grid values live at voxel centers; each marching cube spans 2x2x2
/// adjacent centers, and the lattice is virtually padded with background
/// so shapes touching the volume border still close. Vertices lie on the
/// segments between adjacent voxel centers, in mm. Triangles are oriented
/// outward (positive signed volume for solids).
TriMesh marching_cubes(const BinaryGrid& grid, double iso = 0.5);

}  // namespace implantgen
