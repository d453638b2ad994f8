#pragma once

#include <Eigen/Dense>

#include "implantgen/errors.hpp"

namespace implantgen {

/// Triangle surface mesh; vertices in mm, triangles as vertex-index triples.
struct TriMesh {
    Eigen::Matrix<double, Eigen::Dynamic, 3> vertices;
    Eigen::Matrix<int, Eigen::Dynamic, 3> triangles;

    Eigen::Index vertex_count() const { return vertices.rows(); }
    Eigen::Index triangle_count() const { return triangles.rows(); }

    double triangle_area(Eigen::Index t) const {
        const Eigen::Vector3d a = vertices.row(triangles(t, 0));
        const Eigen::Vector3d b = vertices.row(triangles(t, 1));
        const Eigen::Vector3d c = vertices.row(triangles(t, 2));
        return 0.5 * (b - a).cross(c - a).norm();
    }

    double total_area() const {
        double area = 0.0;
        for (Eigen::Index t = 0; t < triangle_count(); ++t) area += triangle_area(t);
        return area;
    }

    /// Sum of signed tetrahedron volumes; positive for outward-oriented
    /// closed surfaces.
    double signed_volume() const {
        double v = 0.0;
        for (Eigen::Index t = 0; t < triangle_count(); ++t) {
            const Eigen::Vector3d a = vertices.row(triangles(t, 0));
            const Eigen::Vector3d b = vertices.row(triangles(t, 1));
            const Eigen::Vector3d c = vertices.row(triangles(t, 2));
            v += a.dot(b.cross(c)) / 6.0;
        }
        return v;
    }

    void validate() const {
        for (Eigen::Index t = 0; t < triangle_count(); ++t) {
            const int i = triangles(t, 0), j = triangles(t, 1), k = triangles(t, 2);
            if (i < 0 || j < 0 || k < 0 || i >= vertex_count() || j >= vertex_count() ||
                k >= vertex_count())
                throw InternalError("mesh triangle index out of range");
            if (i == j || j == k || i == k) throw InternalError("degenerate mesh triangle");
        }
    }
};

}  // namespace implantgen
