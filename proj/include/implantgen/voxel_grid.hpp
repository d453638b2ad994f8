#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>

#include "implantgen/errors.hpp"

namespace implantgen {

using Index3 = Eigen::Vector3i;
using Vec3 = Eigen::Vector3d;

/// Dense voxel field with physical spacing, linearized x-fastest:
/// flat(i) = x + dims.x * (y + dims.y * z).
///
/// Binary masks use Scalar = std::uint8_t with values in {0,1};
/// real fields (indicator, mean, variance) use Scalar = float.
template <typename Scalar>
struct VoxelGrid {
    Index3 dims{0, 0, 0};
    Vec3 spacing{1.0, 1.0, 1.0};  // mm per voxel
    Eigen::Array<Scalar, Eigen::Dynamic, 1> values;

    VoxelGrid() = default;
    VoxelGrid(const Index3& d, const Vec3& s) : dims(d), spacing(s) {
        if ((d.array() <= 0).any()) throw UserError("voxel grid dims must be positive");
        if ((s.array() <= 0.0).any()) throw UserError("voxel spacing must be positive");
        values.setZero(static_cast<Eigen::Index>(d.x()) * d.y() * d.z());
    }

    Eigen::Index size() const { return values.size(); }

    Eigen::Index flat(int x, int y, int z) const {
        return static_cast<Eigen::Index>(x) +
               static_cast<Eigen::Index>(dims.x()) * (y + static_cast<Eigen::Index>(dims.y()) * z);
    }

    bool in_bounds(int x, int y, int z) const {
        return x >= 0 && y >= 0 && z >= 0 && x < dims.x() && y < dims.y() && z < dims.z();
    }

    Scalar& at(int x, int y, int z) { return values[flat(x, y, z)]; }
    Scalar at(int x, int y, int z) const { return values[flat(x, y, z)]; }

    /// Value with outside-the-volume treated as background (0).
    Scalar at_or_zero(int x, int y, int z) const {
        return in_bounds(x, y, z) ? values[flat(x, y, z)] : Scalar(0);
    }

    bool same_shape(const VoxelGrid& other) const {
        return dims == other.dims && (spacing - other.spacing).norm() == 0.0;
    }

    /// World coordinate (mm) of the voxel center.
    Vec3 voxel_center(int x, int y, int z) const {
        return Vec3((x + 0.5) * spacing.x(), (y + 0.5) * spacing.y(), (z + 0.5) * spacing.z());
    }
};

using BinaryGrid = VoxelGrid<std::uint8_t>;
using RealGrid = VoxelGrid<float>;

inline void require_binary(const BinaryGrid& g, const std::string& what) {
    if (!((g.values == 0) || (g.values == 1)).all())
        throw UserError(what + ": binary grid contains a value outside {0,1}");
}

inline void require_same_shape(const BinaryGrid& a, const BinaryGrid& b, const std::string& what) {
    if (!a.same_shape(b)) throw UserError(what + ": grids differ in dims or spacing");
}

/// out(i) = 1 iff a(i) = 1 and b(i) = 0.
inline BinaryGrid boolean_subtract(const BinaryGrid& a, const BinaryGrid& b) {
    require_same_shape(a, b, "boolean_subtract");
    BinaryGrid out(a.dims, a.spacing);
    out.values = (a.values == 1 && b.values == 0).cast<std::uint8_t>();
    return out;
}

inline Eigen::Index count_foreground(const BinaryGrid& g) {
    return (g.values == 1).count();
}

}  // namespace implantgen
