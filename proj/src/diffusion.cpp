#include "implantgen/diffusion.hpp"

#include <cmath>

namespace implantgen {

DiffusionSchedule make_schedule(int timesteps, double beta_start, double beta_end) {
    if (timesteps < 1) throw UserError("make_schedule: need at least one timestep");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
        throw UserError("make_schedule: require 0 < beta_start <= beta_end < 1");

    DiffusionSchedule s;
    s.timesteps = timesteps;
    s.beta.resize(timesteps);
    for (int t = 0; t < timesteps; ++t)
        s.beta[t] = timesteps == 1
                        ? beta_start
                        : beta_start + (beta_end - beta_start) * t / (timesteps - 1.0);
    s.alpha = 1.0 - s.beta.array();
    s.alpha_bar.resize(timesteps);
    double running = 1.0;
    for (int t = 0; t < timesteps; ++t) {
        running *= s.alpha[t];
        s.alpha_bar[t] = running;
    }
    return s;
}

Points gaussian_points(Eigen::Index count, Rng& rng) {
    Points p(count, 3);
    for (Eigen::Index i = 0; i < count; ++i)
        for (int c = 0; c < 3; ++c) p(i, c) = rng.gaussian();
    return p;
}

Points forward_sample(const Points& x0_free, int t, const Points& eps,
                      const DiffusionSchedule& sched) {
    if (eps.rows() != x0_free.rows())
        throw UserError("forward_sample: noise shape does not match free block");
    const double ab = sched.alpha_bar_at(t);
    return std::sqrt(ab) * x0_free + std::sqrt(1.0 - ab) * eps;
}

double training_loss(const DenoiserFn& denoiser, const PointCloud& x0, int t, const Points& eps,
                     const DiffusionSchedule& sched) {
    const Eigen::Index free_count = x0.count() - x0.split;
    if (free_count <= 0) throw UserError("training_loss: cloud has no free points");
    const Points x0_free = x0.free_block();
    const Points xt = forward_sample(x0_free, t, eps, sched);
    const Points predicted = denoiser(xt, x0.condition_block(), t);
    if (predicted.rows() != free_count)
        throw UserError("training_loss: denoiser output shape mismatch");
    return (eps - predicted).squaredNorm() / static_cast<double>(free_count);
}

Points reverse_step(const Points& xt_free, const Points& c0, int t, const Points& z,
                    const DenoiserFn& denoiser, const DiffusionSchedule& sched) {
    const double beta = sched.beta_at(t);
    const double alpha = sched.alpha_at(t);
    const double alpha_bar = sched.alpha_bar_at(t);
    if (z.rows() != 0 && z.rows() != xt_free.rows())
        throw UserError("reverse_step: z shape does not match free block");
    if (t == 1 && z.rows() != 0 && !z.isZero(0.0))
        throw UserError("reverse_step: z must be zero at the final step");

    const Points predicted = denoiser(xt_free, c0, t);
    Points next =
        (xt_free - ((1.0 - alpha) / std::sqrt(1.0 - alpha_bar)) * predicted) / std::sqrt(alpha);
    if (z.rows() != 0) next += std::sqrt(beta) * z;
    return next;
}

PointCloud complete(const Points& c0, Eigen::Index free_count, const DenoiserFn& denoiser,
                    const DiffusionSchedule& sched, std::uint64_t seed) {
    if (free_count < 1) throw UserError("complete: free point count must be positive");
    // Dedicated stream: callers derive member seeds as seed + index, and
    // other consumers of the same seed stay uncorrelated.
    constexpr std::uint64_t kCompletionStream = 0x300000000ull;
    Rng rng(seed, kCompletionStream);
    Points x = gaussian_points(free_count, rng);
    for (int t = sched.timesteps; t >= 1; --t) {
        const Points z = t > 1 ? gaussian_points(free_count, rng) : Points(0, 3);
        x = reverse_step(x, c0, t, z, denoiser, sched);
    }
    PointCloud out;
    out.points.resize(c0.rows() + free_count, 3);
    out.points.topRows(c0.rows()) = c0;
    out.points.bottomRows(free_count) = x;
    out.split = c0.rows();
    return out;
}

}  // namespace implantgen
