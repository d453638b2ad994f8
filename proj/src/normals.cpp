#include "implantgen/normals.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <limits>
#include <vector>

namespace implantgen {

PointCloud estimate_normals(const PointCloud& cloud, int k) {
    const Eigen::Index n = cloud.count();
    if (k < 3) throw UserError("estimate_normals: k must be at least 3");
    if (n < k) throw UserError("estimate_normals: fewer points than k");

    PointCloud out = cloud;
    out.normals.resize(n, 3);
    const Points& p = cloud.points;

    // k nearest neighbors per point, ties toward the smaller index.
    std::vector<std::vector<int>> knn(static_cast<std::size_t>(n));
    std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j)
            dist[static_cast<std::size_t>(j)] = {(p.row(j) - p.row(i)).squaredNorm(),
                                                 static_cast<int>(j)};
        dist[static_cast<std::size_t>(i)].first = std::numeric_limits<double>::infinity();
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        auto& list = knn[static_cast<std::size_t>(i)];
        list.resize(static_cast<std::size_t>(k));
        for (int m = 0; m < k; ++m) list[static_cast<std::size_t>(m)] = dist[m].second;
    }

    // PCA normal: smallest eigenvector of the neighborhood covariance
    // (the point itself plus its k neighbors).
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Matrix<double, Eigen::Dynamic, 3> nb(k + 1, 3);
        nb.row(0) = p.row(i);
        for (int m = 0; m < k; ++m) nb.row(m + 1) = p.row(knn[static_cast<std::size_t>(i)][m]);
        const Eigen::RowVector3d mean = nb.colwise().mean();
        const Eigen::Matrix<double, Eigen::Dynamic, 3> centered = nb.rowwise() - mean;
        const Eigen::Matrix3d cov = centered.transpose() * centered;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
        out.normals.row(i) = solver.eigenvectors().col(0).normalized();
    }

    // Euclidean MST (Prim), then sign propagation from the highest point.
    std::vector<int> parent(static_cast<std::size_t>(n), -1);
    std::vector<double> best(static_cast<std::size_t>(n),
                             std::numeric_limits<double>::infinity());
    std::vector<bool> done(static_cast<std::size_t>(n), false);
    Eigen::Index root = 0;
    for (Eigen::Index i = 1; i < n; ++i)
        if (p(i, 2) > p(root, 2)) root = i;
    best[static_cast<std::size_t>(root)] = 0.0;
    std::vector<std::vector<int>> children(static_cast<std::size_t>(n));
    for (Eigen::Index step = 0; step < n; ++step) {
        int u = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i)
            if (!done[static_cast<std::size_t>(i)] && best[static_cast<std::size_t>(i)] < bd) {
                bd = best[static_cast<std::size_t>(i)];
                u = static_cast<int>(i);
            }
        done[static_cast<std::size_t>(u)] = true;
        if (parent[static_cast<std::size_t>(u)] >= 0)
            children[static_cast<std::size_t>(parent[static_cast<std::size_t>(u)])].push_back(u);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (done[static_cast<std::size_t>(j)]) continue;
            const double d = (p.row(j) - p.row(u)).squaredNorm();
            if (d < best[static_cast<std::size_t>(j)]) {
                best[static_cast<std::size_t>(j)] = d;
                parent[static_cast<std::size_t>(j)] = u;
            }
        }
    }

    if (out.normals(root, 2) < 0.0) out.normals.row(root) *= -1.0;
    std::vector<int> stack{static_cast<int>(root)};
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int c : children[static_cast<std::size_t>(u)]) {
            if (out.normals.row(c).dot(out.normals.row(u)) < 0.0) out.normals.row(c) *= -1.0;
            stack.push_back(c);
        }
    }

    // Majority of normals should point away from the centroid.
    const Eigen::RowVector3d centroid = p.colwise().mean();
    Eigen::Index outward = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (out.normals.row(i).dot(p.row(i) - centroid) > 0.0) ++outward;
    if (2 * outward < n) out.normals *= -1.0;

    return out;
}

}  // namespace implantgen
