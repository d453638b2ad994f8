#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "implantgen/implant.hpp"
#include "implantgen/metrics.hpp"
#include "test_helpers.hpp"

using namespace implantgen;
using testutil::digitized_ball;
using testutil::random_grid;

namespace {

// Exhaustive nearest-distance reference for the surface metrics.
struct BoundaryOracle {
    std::vector<Index3> a, b;
    Vec3 spacing;

    static double dist(const Index3& p, const Index3& q, const Vec3& s) {
        const double dx = (p.x() - q.x()) * s.x();
        const double dy = (p.y() - q.y()) * s.y();
        const double dz = (p.z() - q.z()) * s.z();
        return std::sqrt(dx * dx + dy * dy + dz * dz);
    }

    double directed_min(const Index3& p, const std::vector<Index3>& set) const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : set) best = std::min(best, dist(p, q, spacing));
        return best;
    }

    double bdsc(double tol) const {
        Eigen::Index matched = 0;
        for (const auto& p : a)
            if (directed_min(p, b) <= tol) ++matched;
        for (const auto& p : b)
            if (directed_min(p, a) <= tol) ++matched;
        return static_cast<double>(matched) / static_cast<double>(a.size() + b.size());
    }

    double hd95() const {
        std::vector<double> pooled;
        for (const auto& p : a) pooled.push_back(directed_min(p, b));
        for (const auto& p : b) pooled.push_back(directed_min(p, a));
        std::sort(pooled.begin(), pooled.end());
        const double rank = 0.95 * static_cast<double>(pooled.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(rank));
        if (lo + 1 >= pooled.size()) return pooled.back();
        const double frac = rank - static_cast<double>(lo);
        return pooled[lo] * (1.0 - frac) + pooled[lo + 1] * frac;
    }

    double hd100() const {
        double worst = 0.0;
        for (const auto& p : a) worst = std::max(worst, directed_min(p, b));
        for (const auto& p : b) worst = std::max(worst, directed_min(p, a));
        return worst;
    }
};

BinaryGrid sparse_mask(const Index3& dims, int max_voxels, std::uint64_t seed) {
    BinaryGrid g(dims, Vec3(0.45, 0.45, 0.45));
    Rng rng(seed);
    const int count = 1 + static_cast<int>(rng.uniform_index(max_voxels));
    for (int i = 0; i < count; ++i) {
        const int x = static_cast<int>(rng.uniform_index(dims.x()));
        const int y = static_cast<int>(rng.uniform_index(dims.y()));
        const int z = static_cast<int>(rng.uniform_index(dims.z()));
        g.at(x, y, z) = 1;
    }
    return g;
}

}  // namespace

TEST_CASE("implant generation composes subtraction with cleanup") {
    const BinaryGrid sc = digitized_ball({32, 32, 32}, 10.0, Vec3(16, 16, 16));
    BinaryGrid sd = sc;
    for (int z = 22; z < 32; ++z)
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) sd.at(x, y, z) = 0;

    const BinaryGrid implant = generate_implant(sc, sd);
    const BinaryGrid raw = boolean_subtract(sc, sd);
    CHECK(((implant.values == 1) <= (raw.values == 1)).all());  // subset of raw subtraction
    CHECK(count_foreground(implant) > 0);

    const BinaryGrid empty = generate_implant(sc, sc);
    CHECK(count_foreground(empty) == 0);

    // Subtracting nothing yields a cleaned copy of the input.
    BinaryGrid zeros(sc.dims, sc.spacing);
    const BinaryGrid cleaned = generate_implant(sc, zeros);
    CHECK(count_foreground(cleaned) > 0);
    CHECK(((cleaned.values == 1) <= (sc.values == 1)).all());
}

TEST_CASE("ensemble statistics") {
    const BinaryGrid m = random_grid({8, 8, 8}, 0.4, 2);

    const EnsembleStats same = ensemble_stats({m, m, m, m});
    CHECK(same.variance.values.maxCoeff() == 0.0f);
    CHECK((same.mean_implant.values == m.values).all());
    CHECK(same.member_count == 4);

    const EnsembleStats single = ensemble_stats({m});
    CHECK((single.mean_implant.values == m.values).all());

    // Two disjoint implants: mean 0.5, variance 0.25, union kept by the
    // >= 0.5 tie rule.
    BinaryGrid a(Index3(4, 4, 4), Vec3(1, 1, 1)), b(Index3(4, 4, 4), Vec3(1, 1, 1));
    a.at(0, 0, 0) = 1;
    b.at(3, 3, 3) = 1;
    const EnsembleStats two = ensemble_stats({a, b});
    CHECK(two.mean.values[two.mean.flat(0, 0, 0)] == 0.5f);
    CHECK(two.variance.values[two.variance.flat(0, 0, 0)] == 0.25f);
    CHECK(two.mean_implant.at(0, 0, 0) == 1);
    CHECK(two.mean_implant.at(3, 3, 3) == 1);
    CHECK(two.mean_implant.at(1, 1, 1) == 0);

    // Permutation invariance and the binary-variance bound.
    std::vector<BinaryGrid> members;
    for (std::uint64_t s = 0; s < 5; ++s) members.push_back(random_grid({6, 6, 6}, 0.5, s + 60));
    const EnsembleStats fwd = ensemble_stats(members);
    std::reverse(members.begin(), members.end());
    const EnsembleStats rev = ensemble_stats(members);
    CHECK((fwd.mean_implant.values == rev.mean_implant.values).all());
    CHECK((fwd.variance.values == rev.variance.values).all());
    CHECK(fwd.variance.values.maxCoeff() <= 0.25f);

    CHECK_THROWS_AS(ensemble_stats({}), UserError);
}

TEST_CASE("dice score basics") {
    const BinaryGrid m = random_grid({10, 10, 10}, 0.3, 5);
    CHECK(dsc(m, m) == 1.0);

    BinaryGrid a(Index3(6, 6, 6), Vec3(1, 1, 1)), b(Index3(6, 6, 6), Vec3(1, 1, 1));
    a.at(0, 0, 0) = 1;
    b.at(5, 5, 5) = 1;
    CHECK(dsc(a, b) == 0.0);

    // |A|=4, |B|=4, |A n B| = 2 -> 0.5.
    BinaryGrid c(Index3(6, 6, 6), Vec3(1, 1, 1)), d(Index3(6, 6, 6), Vec3(1, 1, 1));
    for (int i = 0; i < 4; ++i) c.at(i, 0, 0) = 1;
    for (int i = 2; i < 6; ++i) d.at(i, 0, 0) = 1;
    CHECK(dsc(c, d) == 0.5);

    BinaryGrid e1(Index3(4, 4, 4), Vec3(1, 1, 1)), e2(Index3(4, 4, 4), Vec3(1, 1, 1));
    CHECK_THROWS_AS(dsc(e1, e2), UserError);
    CHECK(dsc(a, b) == dsc(b, a));
}

TEST_CASE("boundary dsc tolerance behavior") {
    const BinaryGrid m = digitized_ball({20, 20, 20}, 6.0, Vec3(10, 10, 10), Vec3(0.4, 0.4, 0.4));
    CHECK(boundary_dsc(m, m, 10.0) == 1.0);

    // One-voxel shift at 0.4 mm spacing is far inside a 10 mm tolerance.
    BinaryGrid shifted(m.dims, m.spacing);
    for (int z = 0; z < 20; ++z)
        for (int y = 0; y < 20; ++y)
            for (int x = 1; x < 20; ++x) shifted.at(x, y, z) = m.at(x - 1, y, z);
    CHECK(boundary_dsc(m, shifted, 10.0) == 1.0);

    // Masks farther apart than the tolerance score zero.
    BinaryGrid far_a(Index3(40, 8, 8), Vec3(1, 1, 1)), far_b(Index3(40, 8, 8), Vec3(1, 1, 1));
    far_a.at(0, 0, 0) = 1;
    far_b.at(39, 0, 0) = 1;
    CHECK(boundary_dsc(far_a, far_b, 10.0) == 0.0);

    BinaryGrid empty_pair(Index3(4, 4, 4), Vec3(1, 1, 1));
    CHECK_THROWS_AS(boundary_dsc(empty_pair, empty_pair, 10.0), UserError);
}

TEST_CASE("hd95 matches hand values and the exhaustive oracle") {
    const BinaryGrid m = random_grid({12, 12, 12}, 0.25, 8);
    CHECK(hd95(m, m) == 0.0);

    // Two single voxels 5 cells apart at 0.45 mm.
    BinaryGrid a(Index3(10, 4, 4), Vec3(0.45, 0.45, 0.45));
    BinaryGrid b(Index3(10, 4, 4), Vec3(0.45, 0.45, 0.45));
    a.at(1, 1, 1) = 1;
    b.at(6, 1, 1) = 1;
    CHECK(hd95(a, b) == doctest::Approx(2.25).epsilon(1e-12));

    BinaryGrid empty(Index3(4, 4, 4), Vec3(1, 1, 1));
    CHECK_THROWS_AS(hd95(m, empty), UserError);

    // Randomized masks against the brute-force oracle, plus the
    // percentile <= maximum law and symmetry under translation.
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const BinaryGrid x = sparse_mask({12, 12, 12}, 100, seed * 7 + 1);
        const BinaryGrid y = sparse_mask({12, 12, 12}, 100, seed * 7 + 4);
        BoundaryOracle oracle{boundary_voxels(x), boundary_voxels(y), x.spacing};

        CHECK(hd95(x, y) == oracle.hd95());
        CHECK(hd95(x, y) == hd95(y, x));
        CHECK(hd95(x, y) <= oracle.hd100());
        CHECK(boundary_dsc(x, y, 2.0) == oracle.bdsc(2.0));
        CHECK(boundary_dsc(x, y, 2.0) == boundary_dsc(y, x, 2.0));
        CHECK(dsc(x, y) == dsc(y, x));
    }
}

TEST_CASE("metrics are invariant under joint translation") {
    const BinaryGrid a0 = sparse_mask({10, 10, 10}, 40, 3);
    const BinaryGrid b0 = sparse_mask({10, 10, 10}, 40, 9);
    BinaryGrid a1(Index3(14, 14, 14), a0.spacing), b1(Index3(14, 14, 14), b0.spacing);
    BinaryGrid a2(Index3(14, 14, 14), a0.spacing), b2(Index3(14, 14, 14), b0.spacing);
    for (int z = 0; z < 10; ++z)
        for (int y = 0; y < 10; ++y)
            for (int x = 0; x < 10; ++x) {
                a1.at(x, y, z) = a0.at(x, y, z);
                b1.at(x, y, z) = b0.at(x, y, z);
                a2.at(x + 3, y + 2, z + 4) = a0.at(x, y, z);
                b2.at(x + 3, y + 2, z + 4) = b0.at(x, y, z);
            }
    CHECK(dsc(a1, b1) == dsc(a2, b2));
    CHECK(boundary_dsc(a1, b1, 2.0) == boundary_dsc(a2, b2, 2.0));
    CHECK(hd95(a1, b1) == hd95(a2, b2));
}

TEST_CASE("evaluate bundles the three metrics") {
    const BinaryGrid m = digitized_ball({16, 16, 16}, 5.0, Vec3(8, 8, 8), Vec3(0.45, 0.45, 0.45));
    const MetricReport r = evaluate(m, m, 10.0);
    CHECK(r.dsc == 1.0);
    CHECK(r.bdsc == 1.0);
    CHECK(r.hd95 == 0.0);
    CHECK(r.tolerance_mm == 10.0);
}
