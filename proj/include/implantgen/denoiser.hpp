#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "implantgen/diffusion.hpp"
#include "implantgen/point_cloud.hpp"
#include "implantgen/rng.hpp"

namespace implantgen {

/// Architectural hyperparameters of the noise-prediction network: a
/// two-level set-abstraction / feature-propagation hierarchy over the
/// concatenated (condition, free) point set, with a 64-d sinusoidal time
/// embedding concatenated to the point features in front of every level.
///
/// Channel widths are fixed by the architecture; grouping radii, neighbor
/// caps and center fractions scale with point density and are recorded in
/// the model manifest.
struct DenoiserConfig {
    double sa1_radius = 0.1;
    double sa2_radius = 0.2;
    int sa1_max_neighbors = 32;
    int sa2_max_neighbors = 32;
    double center_fraction = 0.25;  // FPS keeps this fraction per SA level
    int horizon = 1000;             // diffusion T the model was built for

    static constexpr int kTimeDim = 64;
    static constexpr int kSa1Hidden = 32;
    static constexpr int kSa1Out = 64;
    static constexpr int kSa2Out = 128;
    static constexpr int kFp1Out = 64;
    static constexpr int kFp2Out = 64;

    static constexpr int kG1Rows = 3 + 1 + kTimeDim;        // rel pos, is-cond, temb
    static constexpr int kG2Rows = 3 + kSa1Out + kTimeDim;  // rel pos, feature, temb
    // FP levels concatenate the interpolated features with the skip
    // features of the target level (the SA1 output at the centers, the raw
    // per-point inputs at the full set) and the time embedding.
    static constexpr int kU1Rows = kSa2Out + kSa1Out + kTimeDim;
    static constexpr int kU2Rows = kFp1Out + 3 + 1 + kTimeDim;
};

/// Named parameter tensor inside the flat parameter vector.
struct TensorSpec {
    std::string name;
    Eigen::Index rows, cols;  // cols == 1 for biases
    Eigen::Index offset;
};

/// Fixed flattening order of all trainable tensors.
const std::vector<TensorSpec>& denoiser_layout();
Eigen::Index denoiser_param_count();

/// All weights live in one flat vector (layout above), so optimizers,
/// serialization and finite-difference sweeps all see the same order.
struct DenoiserParams {
    DenoiserConfig config;
    std::uint64_t init_seed = 0;
    Eigen::VectorXd theta;

    Eigen::Map<const Eigen::MatrixXd> tensor(int i) const;
    Eigen::Map<Eigen::MatrixXd> tensor(int i);
};

/// He fan-in initialization, zero biases, zero final head.
DenoiserParams init_denoiser(const DenoiserConfig& config, std::uint64_t seed);

/// Sinusoidal time features (32 sin/cos pairs, geometric frequency ladder
/// with base 10000) passed through MLP(64,64) -> LeakyReLU(0.1) -> MLP(64,64).
Eigen::VectorXd time_embedding(int t, int horizon, const DenoiserParams& params);

/// Greedy max-min farthest point sampling; the first selected index is
/// start_index, ties resolved toward the smaller index.
std::vector<int> farthest_point_sampling(const Points& points, int k, int start_index);

/// For each center, up to max_neighbors indices of points within radius in
/// scan order, padded by repeating the first found index; an empty ball
/// falls back to the single nearest point.
std::vector<std::vector<int>> ball_query(const Points& centers, const Points& points,
                                         double radius, int max_neighbors);

/// Forward pass of the noise network on the stacked (condition, free) set.
/// Returns one predicted noise vector per free point.
Points denoise(const Points& xt_free, const Points& c0, int t, const DenoiserParams& params);

/// Convenience adapter for the diffusion API.
DenoiserFn make_denoiser_fn(const DenoiserParams& params);

struct TrainExample {
    Points condition;
    Points free_points;
};

/// Squared-error diffusion loss of one example at a fixed draw (t, eps);
/// the deterministic core that gradients are checked against.
double example_loss(const DenoiserParams& params, const TrainExample& example, int t,
                    const Points& eps, const DiffusionSchedule& sched);

/// Same loss, also accumulating d(loss)/d(theta) into grad (not cleared).
double example_loss_grad(const DenoiserParams& params, const TrainExample& example, int t,
                         const Points& eps, const DiffusionSchedule& sched,
                         Eigen::VectorXd& grad);

/// Exact gradient of the mean loss over a batch; draws (t, eps) per item
/// from rng in item order. Returns the mean loss.
double loss_gradient(const DenoiserParams& params, const std::vector<TrainExample>& batch,
                     const DiffusionSchedule& sched, Rng& rng, Eigen::VectorXd& grad);

struct TrainConfig {
    double learning_rate = 2e-4;
    int batch_size = 8;
    int epochs = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int threads = 0;  // 0 = hardware concurrency
};

struct FitResult {
    DenoiserParams params;
    std::vector<double> epoch_loss;
};

/// Adam training loop; deterministic for a fixed seed (per-epoch shuffles
/// and per-item noise draws use counter-based streams, and parallel batch
/// evaluation reduces in item order).
FitResult fit(const DenoiserParams& params, const std::vector<TrainExample>& dataset,
              const TrainConfig& config, const DiffusionSchedule& sched, std::uint64_t seed);

}  // namespace implantgen
