#pragma once

#include <Eigen/Dense>

#include "implantgen/errors.hpp"

namespace implantgen {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Ordered point set: the leading `split` rows are condition points, the
/// rest are free points. Normals, when present, are unit vectors per point.
struct PointCloud {
    Points points;
    Eigen::Index split = 0;
    Points normals;  // empty or one row per point

    Eigen::Index count() const { return points.rows(); }
    bool has_normals() const { return normals.rows() == points.rows() && points.rows() > 0; }

    auto condition_block() const { return points.topRows(split); }
    auto free_block() const { return points.bottomRows(points.rows() - split); }

    void validate() const {
        if (split < 0 || split > count()) throw InternalError("point cloud split out of range");
        if (normals.rows() != 0 && normals.rows() != count())
            throw InternalError("normal count does not match point count");
        for (Eigen::Index i = 0; i < normals.rows(); ++i)
            if (std::abs(normals.row(i).norm() - 1.0) > 1e-6)
                throw InternalError("non-unit normal in point cloud");
    }
};

/// Isotropic map between world coordinates and the [-3,3]^3 generation
/// domain: y = (p - offset) * scale.
struct NormalizationTransform {
    double scale = 1.0;
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();
};

/// Fits the transform that centers the cloud's bounding box and scales its
/// largest extent to span exactly [-3, 3].
inline NormalizationTransform fit_normalization(const PointCloud& cloud) {
    if (cloud.count() == 0) throw UserError("fit_normalization: empty cloud");
    const Eigen::Vector3d lo = cloud.points.colwise().minCoeff();
    const Eigen::Vector3d hi = cloud.points.colwise().maxCoeff();
    const double extent = (hi - lo).maxCoeff();
    if (extent <= 0.0) throw UserError("fit_normalization: cloud has zero extent");
    NormalizationTransform t;
    t.scale = 6.0 / extent;
    t.offset = 0.5 * (lo + hi);
    return t;
}

inline PointCloud apply_normalization(const PointCloud& cloud, const NormalizationTransform& t,
                                      bool inverse = false) {
    if (t.scale <= 0.0) throw UserError("apply_normalization: non-invertible transform");
    PointCloud out = cloud;
    if (inverse)
        out.points = (cloud.points / t.scale).rowwise() + t.offset.transpose();
    else
        out.points = (cloud.points.rowwise() - t.offset.transpose()) * t.scale;
    return out;
}

/// Removes the junction layer of a completed cloud: condition points within
/// `radius` of a free point and free points within `radius` of a condition
/// point. Where the generated block attaches to the known surface, both
/// blocks sample the same interior wall from opposite sides; those samples
/// describe no boundary of the completed shape, and feeding them further
/// down the reconstruction pipeline plants a spurious double layer there.
inline PointCloud remove_junction_points(const PointCloud& cloud, double radius) {
    const Eigen::Index cond = cloud.split;
    const double r2 = radius * radius;
    std::vector<bool> keep(static_cast<std::size_t>(cloud.count()), true);
    for (Eigen::Index i = 0; i < cond; ++i)
        for (Eigen::Index j = cond; j < cloud.count(); ++j)
            if ((cloud.points.row(i) - cloud.points.row(j)).squaredNorm() <= r2) {
                keep[static_cast<std::size_t>(i)] = false;
                keep[static_cast<std::size_t>(j)] = false;
            }
    PointCloud out;
    out.points.resize(cloud.count(), 3);
    const bool carry_normals = cloud.has_normals();
    if (carry_normals) out.normals.resize(cloud.count(), 3);
    Eigen::Index n = 0;
    for (Eigen::Index i = 0; i < cloud.count(); ++i) {
        if (!keep[static_cast<std::size_t>(i)]) continue;
        out.points.row(n) = cloud.points.row(i);
        if (carry_normals) out.normals.row(n) = cloud.normals.row(i);
        if (i < cond) out.split = n + 1;
        ++n;
    }
    out.points.conservativeResize(n, 3);
    if (carry_normals) out.normals.conservativeResize(n, 3);
    return out;
}

}  // namespace implantgen
