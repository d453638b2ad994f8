#include "implantgen/implant.hpp"

#include "implantgen/morphology.hpp"

namespace implantgen {

BinaryGrid generate_implant(const BinaryGrid& completed, const BinaryGrid& defective) {
    const BinaryGrid raw = boolean_subtract(completed, defective);
    return binary_opening(median_filter3(raw), 1);
}

EnsembleStats ensemble_stats(const std::vector<BinaryGrid>& implants) {
    if (implants.empty()) throw UserError("ensemble_stats: empty ensemble");
    const BinaryGrid& first = implants.front();
    for (const auto& g : implants) {
        require_binary(g, "ensemble_stats");
        require_same_shape(first, g, "ensemble_stats");
    }
    const int n = static_cast<int>(implants.size());

    Eigen::ArrayXi counts = Eigen::ArrayXi::Zero(first.size());
    for (const auto& g : implants) counts += g.values.cast<int>();

    EnsembleStats stats;
    stats.member_count = n;
    stats.mean = RealGrid(first.dims, first.spacing);
    stats.variance = RealGrid(first.dims, first.spacing);
    stats.mean_implant = BinaryGrid(first.dims, first.spacing);

    const Eigen::ArrayXd mean = counts.cast<double>() / static_cast<double>(n);
    // For 0/1 members, E[x^2] - E[x]^2 reduces to m(1-m).
    const Eigen::ArrayXd variance = (mean * (1.0 - mean)).max(0.0);
    stats.mean.values = mean.cast<float>();
    stats.variance.values = variance.cast<float>();
    stats.mean_implant.values = (2 * counts >= n).cast<std::uint8_t>();
    return stats;
}

}  // namespace implantgen
