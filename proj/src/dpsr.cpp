#include "implantgen/dpsr.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <vector>

namespace implantgen {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

using ComplexField = Eigen::VectorXcd;

/// In-place 3D FFT by running 1D transforms along each axis.
void fft3(ComplexField& data, const Index3& dims, bool inverse) {
    Eigen::FFT<double> fft;
    const int nx = dims.x(), ny = dims.y(), nz = dims.z();
    std::vector<std::complex<double>> line, spectrum;

    auto transform_lines = [&](int len, auto index_of) {
        line.resize(len);
        spectrum.resize(len);
        const Eigen::Index line_count = static_cast<Eigen::Index>(dims.prod()) / len;
        for (Eigen::Index l = 0; l < line_count; ++l) {
            for (int i = 0; i < len; ++i) line[i] = data[index_of(l, i)];
            if (inverse)
                fft.inv(spectrum, line);
            else
                fft.fwd(spectrum, line);
            for (int i = 0; i < len; ++i) data[index_of(l, i)] = spectrum[i];
        }
    };

    // x lines: l enumerates (y,z)
    transform_lines(nx, [&](Eigen::Index l, int i) {
        return static_cast<Eigen::Index>(i) + static_cast<Eigen::Index>(nx) * l;
    });
    // y lines: l enumerates (x,z)
    transform_lines(ny, [&](Eigen::Index l, int i) {
        const Eigen::Index x = l % nx, z = l / nx;
        return x + static_cast<Eigen::Index>(nx) * (static_cast<Eigen::Index>(i) +
                                                    static_cast<Eigen::Index>(ny) * z);
    });
    // z lines: l enumerates (x,y)
    transform_lines(nz, [&](Eigen::Index l, int i) {
        return l + static_cast<Eigen::Index>(nx) * ny * static_cast<Eigen::Index>(i);
    });
}

/// Spectral derivative wavenumber for index j on an n-cell axis, in
/// radians per cell; the Nyquist mode is zeroed (odd-order derivative).
double wavenumber(int j, int n) {
    if (2 * j == n) return 0.0;
    const int s = (j <= n / 2) ? j : j - n;
    return 2.0 * M_PI * static_cast<double>(s) / n;
}

}  // namespace

VectorField rasterize_oriented_points(const PointCloud& cloud, const Index3& dims) {
    if (!cloud.has_normals()) throw UserError("rasterize_oriented_points: cloud has no normals");
    if ((dims.array() <= 0).any()) throw UserError("rasterize_oriented_points: bad dims");

    VectorField field;
    field.dims = dims;
    field.values.setZero(static_cast<Eigen::Index>(dims.x()) * dims.y() * dims.z(), 3);
    field.splat_points = cloud.points;

    constexpr double kDomainTol = 1e-6;
    for (Eigen::Index p = 0; p < cloud.count(); ++p) {
        const Eigen::Vector3d pos = cloud.points.row(p);
        for (int a = 0; a < 3; ++a)
            if (pos[a] < -kDomainTol || pos[a] > dims[a] + kDomainTol)
                throw UserError("rasterize_oriented_points: point outside grid domain");
        // Cell centers sit at integer+0.5; shift so weights come from the
        // fractional part directly.
        const Eigen::Vector3d q = pos - Eigen::Vector3d::Constant(0.5);
        int base[3];
        double frac[3];
        for (int a = 0; a < 3; ++a) {
            const double f = std::floor(q[a]);
            base[a] = static_cast<int>(f);
            frac[a] = q[a] - f;
        }
        const Eigen::Vector3d normal = cloud.normals.row(p);
        for (int dz = 0; dz < 2; ++dz)
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    const double w = (dx ? frac[0] : 1.0 - frac[0]) *
                                     (dy ? frac[1] : 1.0 - frac[1]) *
                                     (dz ? frac[2] : 1.0 - frac[2]);
                    const int cx = ((base[0] + dx) % dims.x() + dims.x()) % dims.x();
                    const int cy = ((base[1] + dy) % dims.y() + dims.y()) % dims.y();
                    const int cz = ((base[2] + dz) % dims.z() + dims.z()) % dims.z();
                    field.values.row(field.flat(cx, cy, cz)) += w * normal.transpose();
                }
    }
    return field;
}

IndicatorGrid spectral_poisson_solve(const VectorField& v, double sigma) {
    const Index3 dims = v.dims;
    for (int a = 0; a < 3; ++a)
        if (!power_of_two(dims[a]))
            throw UserError("spectral_poisson_solve: dims must be powers of two");
    if (sigma < 0.0) throw UserError("spectral_poisson_solve: sigma must be >= 0");

    const Eigen::Index n = v.cell_count();
    std::array<ComplexField, 3> vhat;
    for (int c = 0; c < 3; ++c) {
        vhat[c] = v.values.col(c).cast<std::complex<double>>();
        fft3(vhat[c], dims, false);
    }

    ComplexField chihat(n);
    const std::complex<double> imag_unit(0.0, 1.0);
    Eigen::Index idx = 0;
    for (int z = 0; z < dims.z(); ++z) {
        const double kz = wavenumber(z, dims.z());
        for (int y = 0; y < dims.y(); ++y) {
            const double ky = wavenumber(y, dims.y());
            for (int x = 0; x < dims.x(); ++x, ++idx) {
                const double kx = wavenumber(x, dims.x());
                const double k2 = kx * kx + ky * ky + kz * kz;
                if (k2 == 0.0) {
                    chihat[idx] = 0.0;
                    continue;
                }
                const std::complex<double> divergence =
                    imag_unit * (kx * vhat[0][idx] + ky * vhat[1][idx] + kz * vhat[2][idx]);
                chihat[idx] = divergence / (-k2) * std::exp(-0.5 * sigma * sigma * k2);
            }
        }
    }

    fft3(chihat, dims, true);

    IndicatorGrid chi;
    chi.dims = dims;
    chi.values = chihat.real().array();

    if (v.splat_points.rows() > 0) {
        double mean = 0.0;
        for (Eigen::Index p = 0; p < v.splat_points.rows(); ++p)
            mean += sample_indicator(chi, v.splat_points.row(p));
        mean /= static_cast<double>(v.splat_points.rows());
        chi.values -= mean;
    }
    return chi;
}

double sample_indicator(const IndicatorGrid& chi, const Eigen::Vector3d& pos) {
    const Eigen::Vector3d q = pos - Eigen::Vector3d::Constant(0.5);
    int base[3];
    double frac[3];
    for (int a = 0; a < 3; ++a) {
        const double f = std::floor(q[a]);
        base[a] = static_cast<int>(f);
        frac[a] = q[a] - f;
    }
    double value = 0.0;
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
                const double w = (dx ? frac[0] : 1.0 - frac[0]) * (dy ? frac[1] : 1.0 - frac[1]) *
                                 (dz ? frac[2] : 1.0 - frac[2]);
                const int cx = ((base[0] + dx) % chi.dims.x() + chi.dims.x()) % chi.dims.x();
                const int cy = ((base[1] + dy) % chi.dims.y() + chi.dims.y()) % chi.dims.y();
                const int cz = ((base[2] + dz) % chi.dims.z() + chi.dims.z()) % chi.dims.z();
                value += w * chi.values[chi.flat(cx, cy, cz)];
            }
    return value;
}

BinaryGrid voxelize(const IndicatorGrid& chi, const Vec3& spacing) {
    BinaryGrid out(chi.dims, spacing);
    out.values = (chi.values <= 0.0).cast<std::uint8_t>();
    return out;
}

IndicatorGrid gt_indicator(const BinaryGrid& mask) {
    require_binary(mask, "gt_indicator");
    IndicatorGrid chi;
    chi.dims = mask.dims;
    chi.values = mask.values.cast<double>() * -1.0 + 0.5;
    return chi;
}

double indicator_loss(const IndicatorGrid& chi_hat, const IndicatorGrid& chi) {
    if (chi_hat.dims != chi.dims) throw UserError("indicator_loss: dims mismatch");
    return (chi_hat.values - chi.values).square().mean();
}

}  // namespace implantgen
