#pragma once

#include <Eigen/Dense>

#include "implantgen/point_cloud.hpp"
#include "implantgen/voxel_grid.hpp"

namespace implantgen {

/// Per-cell 3-vector field produced by splatting oriented points.
/// Coordinates are continuous grid-index units: cell (i,j,k) has its
/// center at (i+0.5, j+0.5, k+0.5) and the domain is [0, dims].
/// The splat locations are kept for the solver's zero-level calibration.
struct VectorField {
    Index3 dims{0, 0, 0};
    Eigen::Matrix<double, Eigen::Dynamic, 3> values;  // one row per cell, x-fastest
    Points splat_points;

    Eigen::Index cell_count() const { return values.rows(); }
    Eigen::Index flat(int x, int y, int z) const {
        return static_cast<Eigen::Index>(x) +
               static_cast<Eigen::Index>(dims.x()) * (y + static_cast<Eigen::Index>(dims.y()) * z);
    }
};

/// Scalar indicator field chi: negative inside the shape, positive outside.
struct IndicatorGrid {
    Index3 dims{0, 0, 0};
    Eigen::ArrayXd values;  // x-fastest

    Eigen::Index flat(int x, int y, int z) const {
        return static_cast<Eigen::Index>(x) +
               static_cast<Eigen::Index>(dims.x()) * (y + static_cast<Eigen::Index>(dims.y()) * z);
    }
};

/// Distributes each point's unit normal over the 8 cells around it with
/// trilinear weights (periodic wrap); total splatted mass equals the sum
/// of the normals. Points must carry normals and lie inside [0, dims].
VectorField rasterize_oriented_points(const PointCloud& cloud, const Index3& dims);

/// Solves laplacian(chi) = div(v) with periodic boundaries in the Fourier
/// domain, applying Gaussian spectral smoothing exp(-sigma^2 |k|^2 / 2),
/// then shifts chi so its trilinear samples at the splat points average 0.
/// Each dim must be a power of two.
IndicatorGrid spectral_poisson_solve(const VectorField& v, double sigma);

/// Trilinear sample of the indicator at a grid-space position (periodic).
double sample_indicator(const IndicatorGrid& chi, const Eigen::Vector3d& pos);

/// out(i) = 1 if chi(i) <= 0 else 0.
BinaryGrid voxelize(const IndicatorGrid& chi, const Vec3& spacing = Vec3(1.0, 1.0, 1.0));

/// chi(i) = -0.5 where the mask is set, +0.5 elsewhere.
IndicatorGrid gt_indicator(const BinaryGrid& mask);

/// Mean squared difference over all cells.
double indicator_loss(const IndicatorGrid& chi_hat, const IndicatorGrid& chi);

}  // namespace implantgen
