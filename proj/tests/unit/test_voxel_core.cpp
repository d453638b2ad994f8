#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <vector>

#include "implantgen/morphology.hpp"
#include "implantgen/volume_io.hpp"
#include "test_helpers.hpp"

using namespace implantgen;
using testutil::TempDir;
using testutil::digitized_ball;
using testutil::random_grid;

namespace {

// Independent reference: replace each voxel by the middle element of its
// sorted 27-voxel neighborhood.
BinaryGrid median_oracle(const BinaryGrid& g) {
    BinaryGrid out(g.dims, g.spacing);
    for (int z = 0; z < g.dims.z(); ++z)
        for (int y = 0; y < g.dims.y(); ++y)
            for (int x = 0; x < g.dims.x(); ++x) {
                std::vector<std::uint8_t> window;
                for (int dz = -1; dz <= 1; ++dz)
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx)
                            window.push_back(g.at_or_zero(x + dx, y + dy, z + dz));
                std::sort(window.begin(), window.end());
                out.at(x, y, z) = window[13];
            }
    return out;
}

// Independent erode/dilate over an explicitly enumerated L1 ball.
BinaryGrid opening_oracle(const BinaryGrid& g, int radius) {
    auto ball = [&](int dx, int dy, int dz) {
        return std::abs(dx) + std::abs(dy) + std::abs(dz) <= radius;
    };
    BinaryGrid eroded(g.dims, g.spacing), out(g.dims, g.spacing);
    for (int z = 0; z < g.dims.z(); ++z)
        for (int y = 0; y < g.dims.y(); ++y)
            for (int x = 0; x < g.dims.x(); ++x) {
                bool all = true;
                for (int dz = -radius; dz <= radius && all; ++dz)
                    for (int dy = -radius; dy <= radius && all; ++dy)
                        for (int dx = -radius; dx <= radius && all; ++dx)
                            if (ball(dx, dy, dz) && g.at_or_zero(x + dx, y + dy, z + dz) == 0)
                                all = false;
                eroded.at(x, y, z) = all ? 1 : 0;
            }
    for (int z = 0; z < g.dims.z(); ++z)
        for (int y = 0; y < g.dims.y(); ++y)
            for (int x = 0; x < g.dims.x(); ++x) {
                bool any = false;
                for (int dz = -radius; dz <= radius && !any; ++dz)
                    for (int dy = -radius; dy <= radius && !any; ++dy)
                        for (int dx = -radius; dx <= radius && !any; ++dx)
                            if (ball(dx, dy, dz) &&
                                eroded.at_or_zero(x + dx, y + dy, z + dz) == 1)
                                any = true;
                out.at(x, y, z) = any ? 1 : 0;
            }
    return out;
}

bool subset_of(const BinaryGrid& a, const BinaryGrid& b) {
    return ((a.values == 1) <= (b.values == 1)).all();
}

}  // namespace

TEST_CASE("volume io round trip is bit exact") {
    TempDir dir("volio");
    BinaryGrid g(Index3(2, 2, 2), Vec3(0.4, 0.5, 0.6));
    g.values.setOnes();
    save_volume(g, dir.file("ones.vol"));
    const BinaryGrid back = load_volume(dir.file("ones.vol"));
    CHECK(back.dims == g.dims);
    CHECK(back.spacing == g.spacing);
    CHECK((back.values == g.values).all());

    const BinaryGrid noisy = random_grid({7, 5, 3}, 0.4, 11, Vec3(0.45, 0.45, 0.45));
    save_volume(noisy, dir.file("noisy.vol"));
    const BinaryGrid noisy_back = load_volume(dir.file("noisy.vol"));
    CHECK((noisy_back.values == noisy.values).all());
    CHECK(noisy_back.spacing == noisy.spacing);

    RealGrid r(Index3(4, 3, 2), Vec3(1, 1, 1));
    Rng rng(5);
    for (Eigen::Index i = 0; i < r.size(); ++i) r.values[i] = static_cast<float>(rng.gaussian());
    save_volume(r, dir.file("real.vol"));
    const RealGrid r_back = load_real_volume(dir.file("real.vol"));
    CHECK((r_back.values == r.values).all());
    CHECK(volume_dtype(dir.file("real.vol")) == "float32");
}

TEST_CASE("volume io rejects corrupt inputs") {
    TempDir dir("volio_err");
    CHECK_THROWS_AS(load_volume(dir.file("missing.vol")), UserError);

    BinaryGrid g(Index3(4, 4, 4), Vec3(1, 1, 1));
    save_volume(g, dir.file("g.vol"));

    // Truncate the payload by one byte.
    {
        std::ifstream in(dir.file("g.vol"), std::ios::binary);
        std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
        bytes.pop_back();
        std::ofstream out(dir.file("g.vol"), std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    CHECK_THROWS_AS(load_volume(dir.file("g.vol")), UserError);

    // A 2 inside a binary-declared grid is rejected before write.
    BinaryGrid bad(Index3(2, 2, 2), Vec3(1, 1, 1));
    bad.values[3] = 2;
    CHECK_THROWS_AS(save_volume(bad, dir.file("bad.vol")), UserError);

    // And rejected on load when the payload was written behind our back.
    save_volume(g, dir.file("h.vol"));
    {
        std::fstream f(dir.file("h.vol"), std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(9);
        const char two = 2;
        f.write(&two, 1);
    }
    CHECK_THROWS_AS(load_volume(dir.file("h.vol")), UserError);
}

TEST_CASE("volume io accepts a full 512-cube payload and rejects short ones") {
    TempDir dir("volio_512");
    std::ofstream h(dir.file("big.vol.json"));
    h << R"({"dims":[512,512,512],"spacing_mm":[0.45,0.45,0.45],"dtype":"uint8"})";
    h.close();
    {
        std::ofstream p(dir.file("big.vol"), std::ios::binary);
        std::vector<char> chunk(1 << 20, 0);
        for (int i = 0; i < 128; ++i) p.write(chunk.data(), chunk.size());
    }
    const BinaryGrid big = load_volume(dir.file("big.vol"));
    CHECK(big.dims == Index3(512, 512, 512));
    CHECK(big.size() == 512LL * 512 * 512);

    {
        std::ofstream p(dir.file("big.vol"), std::ios::binary | std::ios::trunc);
        std::vector<char> chunk(1 << 20, 0);
        for (int i = 0; i < 128; ++i) p.write(chunk.data(), chunk.size() - (i == 127 ? 1 : 0));
    }
    CHECK_THROWS_AS(load_volume(dir.file("big.vol")), UserError);
}

TEST_CASE("boolean subtract obeys its laws") {
    const BinaryGrid a = random_grid({9, 8, 7}, 0.5, 3);
    BinaryGrid zeros(a.dims, a.spacing);

    const BinaryGrid self = boolean_subtract(a, a);
    CHECK(count_foreground(self) == 0);

    const BinaryGrid keep = boolean_subtract(a, zeros);
    CHECK((keep.values == a.values).all());

    BinaryGrid ones(a.dims, a.spacing);
    ones.values.setOnes();
    const BinaryGrid all = boolean_subtract(ones, zeros);
    CHECK(count_foreground(all) == all.size());

    BinaryGrid other_shape(Index3(4, 4, 4), a.spacing);
    CHECK_THROWS_AS(boolean_subtract(a, other_shape), UserError);
}

TEST_CASE("boolean subtract of a capped sphere is exactly the cap") {
    const BinaryGrid sphere = digitized_ball({24, 24, 24}, 8.0, Vec3(12, 12, 12));
    BinaryGrid capped = sphere;
    // Remove the z-top cap by hand.
    for (int z = 17; z < 24; ++z)
        for (int y = 0; y < 24; ++y)
            for (int x = 0; x < 24; ++x) capped.at(x, y, z) = 0;

    const BinaryGrid diff = boolean_subtract(sphere, capped);
    for (int z = 0; z < 24; ++z)
        for (int y = 0; y < 24; ++y)
            for (int x = 0; x < 24; ++x) {
                const bool expect = sphere.at(x, y, z) == 1 && z >= 17;
                CHECK(diff.at(x, y, z) == (expect ? 1 : 0));
            }
    CHECK(subset_of(diff, sphere));
}

TEST_CASE("median filter matches the sort oracle and removes speckle") {
    BinaryGrid zeros(Index3(5, 5, 5), Vec3(1, 1, 1));
    const BinaryGrid still_zero = median_filter3(zeros);
    CHECK(count_foreground(still_zero) == 0);

    BinaryGrid speck(Index3(5, 5, 5), Vec3(1, 1, 1));
    speck.at(2, 2, 2) = 1;
    CHECK(count_foreground(median_filter3(speck)) == 0);

    const BinaryGrid g = random_grid({16, 16, 16}, 0.5, 7);
    const BinaryGrid filtered = median_filter3(g);
    const BinaryGrid expected = median_oracle(g);
    CHECK((filtered.values == expected.values).all());
    CHECK(filtered.dims == g.dims);
    CHECK(filtered.spacing == g.spacing);
}

TEST_CASE("median filter is monotone") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const BinaryGrid x = random_grid({10, 10, 10}, 0.35, seed);
        BinaryGrid y = x;
        Rng rng(seed + 100);
        for (Eigen::Index i = 0; i < y.size(); ++i)
            if (rng.uniform() < 0.2) y.values[i] = 1;
        const BinaryGrid fx = median_filter3(x);
        const BinaryGrid fy = median_filter3(y);
        CHECK(subset_of(fx, fy));
    }
}

TEST_CASE("binary opening matches the erode/dilate oracle") {
    BinaryGrid zeros(Index3(6, 6, 6), Vec3(1, 1, 1));
    CHECK(count_foreground(binary_opening(zeros, 1)) == 0);

    BinaryGrid lone(Index3(6, 6, 6), Vec3(1, 1, 1));
    lone.at(3, 3, 3) = 1;
    CHECK(count_foreground(binary_opening(lone, 1)) == 0);

    // Solid 9-cube: the opening keeps the interior footprint.
    BinaryGrid cube(Index3(13, 13, 13), Vec3(1, 1, 1));
    for (int z = 2; z < 11; ++z)
        for (int y = 2; y < 11; ++y)
            for (int x = 2; x < 11; ++x) cube.at(x, y, z) = 1;
    const BinaryGrid opened = binary_opening(cube, 1);
    const BinaryGrid expected = opening_oracle(cube, 1);
    CHECK((opened.values == expected.values).all());
    for (int z = 3; z < 10; ++z)
        for (int y = 3; y < 10; ++y)
            for (int x = 3; x < 10; ++x) CHECK(opened.at(x, y, z) == 1);
    CHECK(subset_of(opened, cube));

    const BinaryGrid g = random_grid({12, 12, 12}, 0.6, 21);
    const BinaryGrid o1 = binary_opening(g, 1);
    CHECK((o1.values == opening_oracle(g, 1).values).all());
    const BinaryGrid o2 = binary_opening(g, 2);
    CHECK((o2.values == opening_oracle(g, 2).values).all());
}

TEST_CASE("binary opening is idempotent on random grids") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const BinaryGrid g = random_grid({16, 16, 16}, 0.55, seed * 3 + 1);
        const BinaryGrid once = binary_opening(g, 1);
        const BinaryGrid twice = binary_opening(once, 1);
        CHECK((once.values == twice.values).all());
        CHECK(subset_of(once, g));
    }
}
