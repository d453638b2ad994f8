#pragma once

#include <string>

#include "implantgen/voxel_grid.hpp"

namespace implantgen {

/// Volume files are a raw little-endian payload at `path` plus a JSON
/// sidecar at `path + ".json"` holding {dims, spacing_mm, dtype}.
/// dtype is "uint8" for binary masks, "float32" for real fields.

BinaryGrid load_volume(const std::string& path);
RealGrid load_real_volume(const std::string& path);

void save_volume(const BinaryGrid& grid, const std::string& path);
void save_volume(const RealGrid& grid, const std::string& path);

/// dtype string recorded in the sidecar ("uint8" or "float32").
std::string volume_dtype(const std::string& path);

}  // namespace implantgen
