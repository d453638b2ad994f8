#include "implantgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace implantgen {

namespace {

/// Squared mm distance between voxel centers.
double d2_mm(const Index3& a, const Index3& b, const Vec3& spacing) {
    const double dx = (a.x() - b.x()) * spacing.x();
    const double dy = (a.y() - b.y()) * spacing.y();
    const double dz = (a.z() - b.z()) * spacing.z();
    return dx * dx + dy * dy + dz * dz;
}

double nearest_mm(const Index3& from, const std::vector<Index3>& to, const Vec3& spacing) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : to) best = std::min(best, d2_mm(from, v, spacing));
    return std::sqrt(best);
}

double percentile_linear(std::vector<double>& values, double q) {
    std::sort(values.begin(), values.end());
    const double rank = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    if (lo + 1 >= values.size()) return values.back();
    const double frac = rank - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

}  // namespace

double dsc(const BinaryGrid& a, const BinaryGrid& b) {
    require_same_shape(a, b, "dsc");
    require_binary(a, "dsc");
    require_binary(b, "dsc");
    const auto ca = count_foreground(a);
    const auto cb = count_foreground(b);
    if (ca == 0 && cb == 0) throw UserError("dsc: both masks are empty, score undefined");
    const Eigen::Index inter = (a.values == 1 && b.values == 1).count();
    return 2.0 * static_cast<double>(inter) / static_cast<double>(ca + cb);
}

std::vector<Index3> boundary_voxels(const BinaryGrid& mask) {
    std::vector<Index3> out;
    static const int nbr[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                                  {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (int z = 0; z < mask.dims.z(); ++z)
        for (int y = 0; y < mask.dims.y(); ++y)
            for (int x = 0; x < mask.dims.x(); ++x) {
                if (mask.at(x, y, z) != 1) continue;
                for (const auto& d : nbr)
                    if (mask.at_or_zero(x + d[0], y + d[1], z + d[2]) == 0) {
                        out.emplace_back(x, y, z);
                        break;
                    }
            }
    return out;
}

double boundary_dsc(const BinaryGrid& a, const BinaryGrid& b, double tolerance_mm) {
    require_same_shape(a, b, "boundary_dsc");
    const auto ba = boundary_voxels(a);
    const auto bb = boundary_voxels(b);
    if (ba.empty() && bb.empty())
        throw UserError("boundary_dsc: both masks have empty boundaries");
    Eigen::Index matched = 0;
    for (const auto& v : ba)
        if (nearest_mm(v, bb, a.spacing) <= tolerance_mm) ++matched;
    for (const auto& v : bb)
        if (nearest_mm(v, ba, a.spacing) <= tolerance_mm) ++matched;
    return static_cast<double>(matched) / static_cast<double>(ba.size() + bb.size());
}

double hd95(const BinaryGrid& a, const BinaryGrid& b) {
    require_same_shape(a, b, "hd95");
    if (count_foreground(a) == 0 || count_foreground(b) == 0)
        throw UserError("hd95: empty mask");
    const auto ba = boundary_voxels(a);
    const auto bb = boundary_voxels(b);
    std::vector<double> pooled;
    pooled.reserve(ba.size() + bb.size());
    for (const auto& v : ba) pooled.push_back(nearest_mm(v, bb, a.spacing));
    for (const auto& v : bb) pooled.push_back(nearest_mm(v, ba, a.spacing));
    return percentile_linear(pooled, 0.95);
}

MetricReport evaluate(const BinaryGrid& pred, const BinaryGrid& truth, double tolerance_mm) {
    MetricReport r;
    r.tolerance_mm = tolerance_mm;
    r.dsc = dsc(pred, truth);
    r.bdsc = boundary_dsc(pred, truth, tolerance_mm);
    r.hd95 = hd95(pred, truth);
    return r;
}

}  // namespace implantgen
