#include "implantgen/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "implantgen/rng.hpp"

namespace implantgen {

namespace {

/// Spatial hash over a uniform grid, for fixed-radius neighbor queries.
class HashGrid {
public:
    HashGrid(const Points& points, double cell) : points_(points), cell_(cell) {
        for (Eigen::Index i = 0; i < points.rows(); ++i)
            cells_[key(points.row(i))].push_back(static_cast<int>(i));
    }

    template <typename Fn>
    void for_neighbors(int i, double radius, Fn&& fn) const {
        const Eigen::RowVector3d p = points_.row(i);
        const double r2 = radius * radius;
        const Eigen::Vector3i base = cell_of(p);
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const auto it = cells_.find(pack(base.x() + dx, base.y() + dy, base.z() + dz));
                    if (it == cells_.end()) continue;
                    for (int j : it->second) {
                        if (j == i) continue;
                        const double d2 = (points_.row(j) - p).squaredNorm();
                        if (d2 <= r2) fn(j, std::sqrt(d2));
                    }
                }
    }

private:
    Eigen::Vector3i cell_of(const Eigen::RowVector3d& p) const {
        return {static_cast<int>(std::floor(p.x() / cell_)),
                static_cast<int>(std::floor(p.y() / cell_)),
                static_cast<int>(std::floor(p.z() / cell_))};
    }
    static std::int64_t pack(int x, int y, int z) {
        return (static_cast<std::int64_t>(x) & 0x1FFFFF) |
               ((static_cast<std::int64_t>(y) & 0x1FFFFF) << 21) |
               ((static_cast<std::int64_t>(z) & 0x1FFFFF) << 42);
    }
    std::int64_t key(const Eigen::RowVector3d& p) const {
        const auto c = cell_of(p);
        return pack(c.x(), c.y(), c.z());
    }

    const Points& points_;
    double cell_;
    std::unordered_map<std::int64_t, std::vector<int>> cells_;
};

/// Binary max-heap with position tracking so weights can be updated.
class WeightHeap {
public:
    explicit WeightHeap(const std::vector<double>& weights) : weights_(weights) {
        heap_.resize(weights.size());
        pos_.resize(weights.size());
        for (std::size_t i = 0; i < weights.size(); ++i) heap_[i] = static_cast<int>(i);
        for (std::size_t i = weights.size(); i-- > 0;) sift_down(i);
    }

    int pop_max() {
        const int top = heap_.front();
        swap_entries(0, heap_.size() - 1);
        heap_.pop_back();
        if (!heap_.empty()) sift_down(0);
        return top;
    }

    void update(int item, double weight) {
        weights_[static_cast<std::size_t>(item)] = weight;
        const std::size_t at = pos_[static_cast<std::size_t>(item)];
        sift_down(sift_up(at));
    }

    double weight(int item) const { return weights_[static_cast<std::size_t>(item)]; }
    bool empty() const { return heap_.empty(); }

private:
    bool less(int a, int b) const {  // heap order: larger weight first, index breaks ties
        const double wa = weights_[static_cast<std::size_t>(a)];
        const double wb = weights_[static_cast<std::size_t>(b)];
        return wa != wb ? wa < wb : a < b;
    }
    void swap_entries(std::size_t i, std::size_t j) {
        std::swap(heap_[i], heap_[j]);
        pos_[static_cast<std::size_t>(heap_[i])] = i;
        pos_[static_cast<std::size_t>(heap_[j])] = j;
    }
    std::size_t sift_up(std::size_t i) {
        while (i > 0) {
            const std::size_t parent = (i - 1) / 2;
            if (!less(heap_[parent], heap_[i])) break;
            swap_entries(i, parent);
            i = parent;
        }
        return i;
    }
    void sift_down(std::size_t i) {
        const std::size_t n = heap_.size();
        while (true) {
            std::size_t largest = i;
            const std::size_t l = 2 * i + 1, r = 2 * i + 2;
            if (l < n && less(heap_[largest], heap_[l])) largest = l;
            if (r < n && less(heap_[largest], heap_[r])) largest = r;
            if (largest == i) break;
            swap_entries(i, largest);
            i = largest;
        }
    }

    std::vector<double> weights_;
    std::vector<int> heap_;
    std::vector<std::size_t> pos_;
};

Points sample_on_mesh(const TriMesh& mesh, Eigen::Index count, Rng& rng) {
    std::vector<double> cumulative(mesh.triangle_count());
    double total = 0.0;
    for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
        total += mesh.triangle_area(t);
        cumulative[static_cast<std::size_t>(t)] = total;
    }
    if (total <= 0.0) throw UserError("surface sampling: mesh has zero area");

    Points out(count, 3);
    for (Eigen::Index s = 0; s < count; ++s) {
        const double u = rng.uniform(0.0, total);
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const auto t = static_cast<Eigen::Index>(
            std::min<std::ptrdiff_t>(it - cumulative.begin(), mesh.triangle_count() - 1));
        const Eigen::RowVector3d a = mesh.vertices.row(mesh.triangles(t, 0));
        const Eigen::RowVector3d b = mesh.vertices.row(mesh.triangles(t, 1));
        const Eigen::RowVector3d c = mesh.vertices.row(mesh.triangles(t, 2));
        const double su = std::sqrt(rng.uniform(0.0, 1.0));
        const double v = rng.uniform(0.0, 1.0);
        out.row(s) = (1.0 - su) * a + su * (1.0 - v) * b + su * v * c;
    }
    return out;
}

}  // namespace

PointCloud uniform_surface_sample(const TriMesh& mesh, Eigen::Index count, std::uint64_t seed) {
    if (count < 1) throw UserError("uniform_surface_sample: count must be positive");
    Rng rng(seed);
    PointCloud cloud;
    cloud.points = sample_on_mesh(mesh, count, rng);
    return cloud;
}

PointCloud poisson_disk_sample(const TriMesh& mesh, Eigen::Index count, std::uint64_t seed) {
    if (count < 1) throw UserError("poisson_disk_sample: count must be positive");
    const double area = mesh.total_area();
    if (area <= 0.0) throw UserError("poisson_disk_sample: mesh has zero area");

    Rng rng(seed);
    const Eigen::Index candidate_count = 4 * count;
    const Points candidates = sample_on_mesh(mesh, candidate_count, rng);

    // Target radius for `count` samples on a surface of this area.
    const double r_max = std::sqrt(area / (2.0 * std::sqrt(3.0) * static_cast<double>(count)));
    const double r_cut = 2.0 * r_max;

    const HashGrid grid(candidates, r_cut);
    auto contribution = [&](double d) {
        const double base = 1.0 - d / r_cut;
        if (base <= 0.0) return 0.0;
        double p = base * base;  // base^8
        p *= p;
        return p * p;
    };

    std::vector<double> weights(static_cast<std::size_t>(candidate_count), 0.0);
    for (Eigen::Index i = 0; i < candidate_count; ++i)
        grid.for_neighbors(static_cast<int>(i), r_cut, [&](int, double d) {
            weights[static_cast<std::size_t>(i)] += contribution(d);
        });

    WeightHeap heap(weights);
    std::vector<bool> alive(static_cast<std::size_t>(candidate_count), true);
    Eigen::Index remaining = candidate_count;
    while (remaining > count) {
        const int victim = heap.pop_max();
        alive[static_cast<std::size_t>(victim)] = false;
        --remaining;
        grid.for_neighbors(victim, r_cut, [&](int j, double d) {
            if (!alive[static_cast<std::size_t>(j)]) return;
            heap.update(j, heap.weight(j) - contribution(d));
        });
    }

    PointCloud cloud;
    cloud.points.resize(count, 3);
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < candidate_count; ++i)
        if (alive[static_cast<std::size_t>(i)]) cloud.points.row(at++) = candidates.row(i);
    return cloud;
}

}  // namespace implantgen
