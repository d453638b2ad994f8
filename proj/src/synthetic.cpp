#include "implantgen/synthetic.hpp"

#include <cmath>

#include "implantgen/rng.hpp"

namespace implantgen {

namespace {

void validate_spec(const PhantomSpec& spec) {
    if ((spec.radii.array() <= 0.0).any()) throw UserError("phantom: radii must be positive");
    if (spec.thickness <= 0.0 || spec.thickness > spec.radii.minCoeff())
        throw UserError("phantom: thickness must lie in (0, min radius]");
    for (int a = 0; a < 3; ++a)
        if (spec.radii[a] + 2.0 > 0.5 * spec.dims[a])
            throw UserError("phantom: shell does not fit inside dims with a 2-voxel margin");
    if (std::abs(spec.defect_direction.norm() - 1.0) > 1e-6)
        throw UserError("phantom: defect direction must be a unit vector");
    if (spec.defect_angle_deg <= 0.0 || spec.defect_angle_deg >= 180.0)
        throw UserError("phantom: defect angle must lie in (0, 180) degrees");
}

}  // namespace

PhantomTriple make_phantom(const PhantomSpec& spec) {
    validate_spec(spec);

    const Vec3 center = 0.5 * spec.dims.cast<double>();
    const bool solid = spec.thickness >= spec.radii.minCoeff();
    const Vec3 inner = solid ? Vec3(1.0, 1.0, 1.0) : Vec3(spec.radii.array() - spec.thickness);
    // Angular cap: shell voxels whose direction from the center lies within
    // the defect cone.
    const double cos_cap = std::cos(spec.defect_angle_deg * M_PI / 180.0);

    PhantomTriple t;
    t.complete_shape = BinaryGrid(spec.dims, spec.spacing);
    t.defective_shape = BinaryGrid(spec.dims, spec.spacing);

    for (int z = 0; z < spec.dims.z(); ++z)
        for (int y = 0; y < spec.dims.y(); ++y)
            for (int x = 0; x < spec.dims.x(); ++x) {
                const Vec3 p(x + 0.5, y + 0.5, z + 0.5);
                const Vec3 d = p - center;
                const bool in_shape =
                    (d.array() / spec.radii.array()).matrix().squaredNorm() <= 1.0 &&
                    (solid || (d.array() / inner.array()).matrix().squaredNorm() >= 1.0);
                if (!in_shape) continue;
                t.complete_shape.at(x, y, z) = 1;
                const double len = d.norm();
                const bool in_cap =
                    len > 0.0 && d.dot(spec.defect_direction) >= cos_cap * len;
                t.defective_shape.at(x, y, z) = in_cap ? 0 : 1;
            }

    t.implant = boolean_subtract(t.complete_shape, t.defective_shape);
    if (count_foreground(t.implant) == 0) throw UserError("phantom: defect removes no voxels");
    if (count_foreground(t.defective_shape) == 0)
        throw UserError("phantom: defect removes the entire shell");
    return t;
}

std::vector<DatasetElement> make_dataset(int n, const PhantomSpec& base,
                                         const DatasetJitter& jitter, std::uint64_t seed) {
    if (n < 1) throw UserError("make_dataset: need at least one element");
    validate_spec(base);  // jitter overflow is clamped below, gross misfits are not
    std::vector<DatasetElement> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng rng(seed, static_cast<std::uint64_t>(i));
        PhantomSpec spec = base;
        for (int a = 0; a < 3; ++a)
            spec.radii[a] =
                base.radii[a] * rng.uniform(1.0 - jitter.radii_fraction, 1.0 + jitter.radii_fraction);
        // Clamp so the jittered shell still fits, and keep solid phantoms
        // solid when a jittered radius dips below the base thickness.
        for (int a = 0; a < 3; ++a)
            spec.radii[a] = std::min(spec.radii[a], 0.5 * spec.dims[a] - 2.0);
        spec.thickness = std::min(spec.thickness, spec.radii.minCoeff());
        Vec3 dir;
        do {
            dir = Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian());
        } while (dir.norm() < 1e-9);
        spec.defect_direction = dir.normalized();
        spec.defect_angle_deg = rng.uniform(jitter.angle_min_deg, jitter.angle_max_deg);
        out.push_back({spec, make_phantom(spec)});
    }
    return out;
}

}  // namespace implantgen
