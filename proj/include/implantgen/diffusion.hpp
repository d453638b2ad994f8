#pragma once

#include <Eigen/Dense>
#include <functional>

#include "implantgen/point_cloud.hpp"
#include "implantgen/rng.hpp"

namespace implantgen {

/// Variance schedule tables for t = 1..T (stored 0-based: entry t-1).
struct DiffusionSchedule {
    int timesteps = 0;
    Eigen::VectorXd beta;
    Eigen::VectorXd alpha;      // 1 - beta
    Eigen::VectorXd alpha_bar;  // running product of alpha

    double beta_at(int t) const { return beta[check(t)]; }
    double alpha_at(int t) const { return alpha[check(t)]; }
    double alpha_bar_at(int t) const { return alpha_bar[check(t)]; }

private:
    int check(int t) const {
        if (t < 1 || t > timesteps) throw UserError("diffusion step index out of range");
        return t - 1;
    }
};

/// beta interpolated linearly from beta_start (t=1) to beta_end (t=T).
DiffusionSchedule make_schedule(int timesteps, double beta_start, double beta_end);

/// Noise prediction network interface: (x_t free block, condition block, t)
/// -> predicted per-point noise.
using DenoiserFn = std::function<Points(const Points& xt_free, const Points& c0, int t)>;

/// Closed-form forward noising of the free block:
/// x_t = sqrt(alpha_bar_t) * x_0 + sqrt(1 - alpha_bar_t) * eps.
Points forward_sample(const Points& x0_free, int t, const Points& eps,
                      const DiffusionSchedule& sched);

/// Mean over free points of the squared noise-prediction error.
/// Condition points contribute nothing.
double training_loss(const DenoiserFn& denoiser, const PointCloud& x0, int t, const Points& eps,
                     const DiffusionSchedule& sched);

/// One reverse transition:
/// x_{t-1} = (x_t - (1-alpha_t)/sqrt(1-alpha_bar_t) * eps_hat) / sqrt(alpha_t)
///           + sqrt(beta_t) * z.
/// z must be zero at the final step t = 1. The condition block is passed
/// through to the denoiser untouched.
Points reverse_step(const Points& xt_free, const Points& c0, int t, const Points& z,
                    const DenoiserFn& denoiser, const DiffusionSchedule& sched);

/// Full completion: draws x_T ~ N(0, I) for the free block and runs the
/// reverse chain t = T..1 while holding the condition points fixed.
/// Deterministic for a fixed seed.
PointCloud complete(const Points& c0, Eigen::Index free_count, const DenoiserFn& denoiser,
                    const DiffusionSchedule& sched, std::uint64_t seed);

/// Fills a matrix with standard normal draws row by row (platform-stable
/// draw order).
Points gaussian_points(Eigen::Index count, Rng& rng);

}  // namespace implantgen
