#include "implantgen/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <thread>

namespace implantgen {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum TensorId {
    kWt1 = 0,
    kBt1,
    kWt2,
    kBt2,
    kW1a,
    kB1a,
    kW1b,
    kB1b,
    kW2,
    kB2,
    kWf1,
    kBf1,
    kWf2,
    kBf2,
    kWh,
    kBh,
    kTensorCount
};

std::vector<TensorSpec> build_layout() {
    using C = DenoiserConfig;
    std::vector<TensorSpec> layout = {
        {"time_mlp1.weight", C::kTimeDim, C::kTimeDim, 0},
        {"time_mlp1.bias", C::kTimeDim, 1, 0},
        {"time_mlp2.weight", C::kTimeDim, C::kTimeDim, 0},
        {"time_mlp2.bias", C::kTimeDim, 1, 0},
        {"sa1.mlp1.weight", C::kSa1Hidden, C::kG1Rows, 0},
        {"sa1.mlp1.bias", C::kSa1Hidden, 1, 0},
        {"sa1.mlp2.weight", C::kSa1Out, C::kSa1Hidden, 0},
        {"sa1.mlp2.bias", C::kSa1Out, 1, 0},
        {"sa2.mlp.weight", C::kSa2Out, C::kG2Rows, 0},
        {"sa2.mlp.bias", C::kSa2Out, 1, 0},
        {"fp1.mlp.weight", C::kFp1Out, C::kU1Rows, 0},
        {"fp1.mlp.bias", C::kFp1Out, 1, 0},
        {"fp2.mlp.weight", C::kFp2Out, C::kU2Rows, 0},
        {"fp2.mlp.bias", C::kFp2Out, 1, 0},
        {"head.weight", 3, C::kFp2Out, 0},
        {"head.bias", 3, 1, 0},
    };
    Eigen::Index offset = 0;
    for (auto& t : layout) {
        t.offset = offset;
        offset += t.rows * t.cols;
    }
    return layout;
}

double lrelu(double x) { return x > 0.0 ? x : 0.1 * x; }

void lrelu_inplace(MatrixXd& m) {
    m = m.unaryExpr([](double x) { return lrelu(x); });
}

/// Derivative mask recovered from post-activation values.
MatrixXd lrelu_mask(const MatrixXd& post) {
    return post.unaryExpr([](double y) { return y > 0.0 ? 1.0 : 0.1; });
}

int lexmin_row(const Points& p) {
    int best = 0;
    for (Eigen::Index i = 1; i < p.rows(); ++i) {
        for (int c = 0; c < 3; ++c) {
            if (p(i, c) < p(best, c)) {
                best = static_cast<int>(i);
                break;
            }
            if (p(i, c) > p(best, c)) break;
        }
    }
    return best;
}

/// Nearest-at-most-K neighbors within radius, ordered by (distance, index).
/// Unlike the scan-order ball query, the selected set does not depend on
/// the ordering of the input points, which keeps the network permutation
/// invariant through its max-pools.
std::vector<int> knn_in_radius(const Points& points, const Eigen::RowVector3d& center,
                               double radius, int max_neighbors) {
    std::vector<std::pair<double, int>> within;
    const double r2 = radius * radius;
    double best_d2 = std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const double d2 = (points.row(i) - center).squaredNorm();
        if (d2 <= r2) within.emplace_back(d2, static_cast<int>(i));
        if (d2 < best_d2) {
            best_d2 = d2;
            best_i = static_cast<int>(i);
        }
    }
    if (within.empty()) return {best_i};
    std::sort(within.begin(), within.end());
    if (static_cast<int>(within.size()) > max_neighbors) within.resize(max_neighbors);
    std::vector<int> out;
    out.reserve(within.size());
    for (const auto& [d2, i] : within) out.push_back(i);
    return out;
}

struct Interp {
    std::array<int, 3> index{0, 0, 0};
    std::array<double, 3> weight{0.0, 0.0, 0.0};
    int count = 0;
};

/// Inverse-squared-distance interpolation over the 3 nearest sources;
/// an exact positional hit takes the source feature unchanged.
Interp interp_weights(const Points& sources, const Eigen::RowVector3d& target) {
    std::vector<std::pair<double, int>> d2(sources.rows());
    for (Eigen::Index i = 0; i < sources.rows(); ++i)
        d2[i] = {(sources.row(i) - target).squaredNorm(), static_cast<int>(i)};
    const int m = static_cast<int>(std::min<Eigen::Index>(3, sources.rows()));
    std::partial_sort(d2.begin(), d2.begin() + m, d2.end());
    Interp w;
    w.count = m;
    if (d2[0].first < 1e-24) {
        w.count = 1;
        w.index[0] = d2[0].second;
        w.weight[0] = 1.0;
        return w;
    }
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
        w.index[i] = d2[i].second;
        w.weight[i] = 1.0 / d2[i].first;
        total += w.weight[i];
    }
    for (int i = 0; i < m; ++i) w.weight[i] /= total;
    return w;
}

struct Grouping {
    std::vector<int> members;   // flattened neighbor point indices
    std::vector<int> offsets;   // per center: start in members; size n_centers+1
};

Grouping group_points(const Points& candidates, const Points& centers, double radius,
                      int max_neighbors) {
    Grouping g;
    g.offsets.push_back(0);
    for (Eigen::Index j = 0; j < centers.rows(); ++j) {
        const auto nbrs = knn_in_radius(candidates, centers.row(j), radius, max_neighbors);
        g.members.insert(g.members.end(), nbrs.begin(), nbrs.end());
        g.offsets.push_back(static_cast<int>(g.members.size()));
    }
    return g;
}

/// Everything the backward pass needs from one forward evaluation.
struct Trace {
    Eigen::Index cond_count = 0, free_count = 0;
    VectorXd sinus, time_hidden, time_embed;  // time_hidden is post-activation

    Points stacked;  // condition rows first, then free rows
    std::vector<int> idx1, idx2;
    Grouping g1, g2;
    MatrixXd feat_g1, act_g1a, act_g1b;  // inputs and post-activations, SA1
    MatrixXd pooled1;                    // kSa1Out x n1
    Eigen::MatrixXi argmax1;
    MatrixXd feat_g2, act_g2;
    MatrixXd pooled2;  // kSa2Out x n2
    Eigen::MatrixXi argmax2;
    std::vector<Interp> fp1, fp2;
    MatrixXd u1, act_f3;  // FP1 input / output
    MatrixXd u2, act_f4;  // FP2 input / output
    MatrixXd head_out;    // 3 x free_count
};

VectorXd sinusoidal_features(int t, int horizon) {
    if (t < 1 || t > horizon) throw UserError("time_embedding: step index out of range");
    VectorXd s(DenoiserConfig::kTimeDim);
    constexpr int kPairs = DenoiserConfig::kTimeDim / 2;
    for (int i = 0; i < kPairs; ++i) {
        const double omega = std::pow(10000.0, -static_cast<double>(i) / (kPairs - 1));
        s[2 * i] = std::sin(t * omega);
        s[2 * i + 1] = std::cos(t * omega);
    }
    return s;
}

struct ParamView {
    const DenoiserParams& p;
    Eigen::Map<const MatrixXd> operator[](int i) const { return p.tensor(i); }
};

void forward(const DenoiserParams& params, const Points& xt_free, const Points& c0, int t,
             Trace& tr) {
    using C = DenoiserConfig;
    const ParamView w{params};
    const auto& cfg = params.config;
    if (xt_free.rows() == 0) throw UserError("denoise: empty free block");

    tr.cond_count = c0.rows();
    tr.free_count = xt_free.rows();
    const Eigen::Index total = tr.cond_count + tr.free_count;
    tr.stacked.resize(total, 3);
    tr.stacked.topRows(tr.cond_count) = c0;
    tr.stacked.bottomRows(tr.free_count) = xt_free;
    if (!tr.stacked.allFinite()) throw UserError("denoise: non-finite input coordinates");

    // Time embedding, shared by every level.
    tr.sinus = sinusoidal_features(t, cfg.horizon);
    tr.time_hidden = (w[kWt1] * tr.sinus + w[kBt1].col(0)).unaryExpr([](double x) {
        return lrelu(x);
    });
    tr.time_embed = w[kWt2] * tr.time_hidden + w[kBt2].col(0);

    // SA level 1: group all points around FPS centers.
    const int n1 = std::max<int>(1, static_cast<int>(std::ceil(total * cfg.center_fraction)));
    tr.idx1 = farthest_point_sampling(tr.stacked, n1, lexmin_row(tr.stacked));
    Points centers1(n1, 3);
    for (int j = 0; j < n1; ++j) centers1.row(j) = tr.stacked.row(tr.idx1[j]);
    tr.g1 = group_points(tr.stacked, centers1, cfg.sa1_radius, cfg.sa1_max_neighbors);

    const int cols1 = static_cast<int>(tr.g1.members.size());
    tr.feat_g1.resize(C::kG1Rows, cols1);
    for (int j = 0; j < n1; ++j)
        for (int c = tr.g1.offsets[j]; c < tr.g1.offsets[j + 1]; ++c) {
            const int i = tr.g1.members[c];
            tr.feat_g1.block<3, 1>(0, c) =
                (tr.stacked.row(i) - centers1.row(j)).transpose();
            tr.feat_g1(3, c) = i < tr.cond_count ? 1.0 : 0.0;
            tr.feat_g1.block<C::kTimeDim, 1>(4, c) = tr.time_embed;
        }
    tr.act_g1a = (w[kW1a] * tr.feat_g1).colwise() + w[kB1a].col(0);
    lrelu_inplace(tr.act_g1a);
    tr.act_g1b = (w[kW1b] * tr.act_g1a).colwise() + w[kB1b].col(0);
    lrelu_inplace(tr.act_g1b);

    tr.pooled1.resize(C::kSa1Out, n1);
    tr.argmax1.resize(C::kSa1Out, n1);
    for (int j = 0; j < n1; ++j)
        for (int r = 0; r < C::kSa1Out; ++r) {
            double best = -std::numeric_limits<double>::infinity();
            int best_c = tr.g1.offsets[j];
            for (int c = tr.g1.offsets[j]; c < tr.g1.offsets[j + 1]; ++c)
                if (tr.act_g1b(r, c) > best) {
                    best = tr.act_g1b(r, c);
                    best_c = c;
                }
            tr.pooled1(r, j) = best;
            tr.argmax1(r, j) = best_c;
        }

    // SA level 2: group the level-1 centers.
    const int n2 = std::max<int>(1, static_cast<int>(std::ceil(n1 * cfg.center_fraction)));
    tr.idx2 = farthest_point_sampling(centers1, n2, lexmin_row(centers1));
    Points centers2(n2, 3);
    for (int j = 0; j < n2; ++j) centers2.row(j) = centers1.row(tr.idx2[j]);
    tr.g2 = group_points(centers1, centers2, cfg.sa2_radius, cfg.sa2_max_neighbors);

    const int cols2 = static_cast<int>(tr.g2.members.size());
    tr.feat_g2.resize(C::kG2Rows, cols2);
    for (int j = 0; j < n2; ++j)
        for (int c = tr.g2.offsets[j]; c < tr.g2.offsets[j + 1]; ++c) {
            const int i = tr.g2.members[c];
            tr.feat_g2.block<3, 1>(0, c) = (centers1.row(i) - centers2.row(j)).transpose();
            tr.feat_g2.block<C::kSa1Out, 1>(3, c) = tr.pooled1.col(i);
            tr.feat_g2.block<C::kTimeDim, 1>(3 + C::kSa1Out, c) = tr.time_embed;
        }
    tr.act_g2 = (w[kW2] * tr.feat_g2).colwise() + w[kB2].col(0);
    lrelu_inplace(tr.act_g2);

    tr.pooled2.resize(C::kSa2Out, n2);
    tr.argmax2.resize(C::kSa2Out, n2);
    for (int j = 0; j < n2; ++j)
        for (int r = 0; r < C::kSa2Out; ++r) {
            double best = -std::numeric_limits<double>::infinity();
            int best_c = tr.g2.offsets[j];
            for (int c = tr.g2.offsets[j]; c < tr.g2.offsets[j + 1]; ++c)
                if (tr.act_g2(r, c) > best) {
                    best = tr.act_g2(r, c);
                    best_c = c;
                }
            tr.pooled2(r, j) = best;
            tr.argmax2(r, j) = best_c;
        }

    // FP level 1: centers2 -> centers1, with the SA1 features as skip.
    tr.fp1.resize(n1);
    tr.u1.resize(C::kU1Rows, n1);
    for (int i = 0; i < n1; ++i) {
        tr.fp1[i] = interp_weights(centers2, centers1.row(i));
        VectorXd f = VectorXd::Zero(C::kSa2Out);
        for (int m = 0; m < tr.fp1[i].count; ++m)
            f += tr.fp1[i].weight[m] * tr.pooled2.col(tr.fp1[i].index[m]);
        tr.u1.col(i).head(C::kSa2Out) = f;
        tr.u1.col(i).segment(C::kSa2Out, C::kSa1Out) = tr.pooled1.col(i);
        tr.u1.col(i).tail(C::kTimeDim) = tr.time_embed;
    }
    tr.act_f3 = (w[kWf1] * tr.u1).colwise() + w[kBf1].col(0);
    lrelu_inplace(tr.act_f3);

    // FP level 2: centers1 -> every point, with the raw per-point inputs
    // (own coordinates and the is-condition bit) as skip.
    tr.fp2.resize(total);
    tr.u2.resize(C::kU2Rows, total);
    for (Eigen::Index p = 0; p < total; ++p) {
        tr.fp2[p] = interp_weights(centers1, tr.stacked.row(p));
        VectorXd f = VectorXd::Zero(C::kFp1Out);
        for (int m = 0; m < tr.fp2[p].count; ++m)
            f += tr.fp2[p].weight[m] * tr.act_f3.col(tr.fp2[p].index[m]);
        tr.u2.col(p).head(C::kFp1Out) = f;
        tr.u2.col(p).segment(C::kFp1Out, 3) = tr.stacked.row(p).transpose();
        tr.u2(C::kFp1Out + 3, p) = p < tr.cond_count ? 1.0 : 0.0;
        tr.u2.col(p).tail(C::kTimeDim) = tr.time_embed;
    }
    tr.act_f4 = (w[kWf2] * tr.u2).colwise() + w[kBf2].col(0);
    lrelu_inplace(tr.act_f4);

    tr.head_out = (w[kWh] * tr.act_f4.rightCols(tr.free_count)).colwise() + w[kBh].col(0);
    if (!tr.head_out.allFinite())
        throw InternalError("denoise: non-finite activation in forward pass");
}

struct GradView {
    VectorXd& g;
    const std::vector<TensorSpec>& layout;
    Eigen::Map<MatrixXd> operator[](int i) {
        const auto& t = layout[i];
        return Eigen::Map<MatrixXd>(g.data() + t.offset, t.rows, t.cols);
    }
};

/// Accumulates d(loss)/d(params) given d(loss)/d(head output).
void backward(const DenoiserParams& params, const Trace& tr, const MatrixXd& d_head,
              VectorXd& grad) {
    using C = DenoiserConfig;
    const ParamView w{params};
    GradView g{grad, denoiser_layout()};

    VectorXd d_time = VectorXd::Zero(C::kTimeDim);

    // Head.
    g[kWh] += d_head * tr.act_f4.rightCols(tr.free_count).transpose();
    g[kBh].col(0) += d_head.rowwise().sum();
    MatrixXd d_f4 = MatrixXd::Zero(C::kFp2Out, tr.stacked.rows());
    d_f4.rightCols(tr.free_count) = w[kWh].transpose() * d_head;

    // FP2 dense layer.
    const MatrixXd d_u2pre = d_f4.cwiseProduct(lrelu_mask(tr.act_f4));
    g[kWf2] += d_u2pre * tr.u2.transpose();
    g[kBf2].col(0) += d_u2pre.rowwise().sum();
    const MatrixXd d_u2 = w[kWf2].transpose() * d_u2pre;
    d_time += d_u2.bottomRows(C::kTimeDim).rowwise().sum();

    // FP2 interpolation -> F3.
    MatrixXd d_f3 = MatrixXd::Zero(C::kFp1Out, tr.act_f3.cols());
    for (Eigen::Index p = 0; p < tr.stacked.rows(); ++p)
        for (int m = 0; m < tr.fp2[p].count; ++m)
            d_f3.col(tr.fp2[p].index[m]) +=
                tr.fp2[p].weight[m] * d_u2.col(p).head(C::kFp1Out);

    // FP1 dense layer.
    const MatrixXd d_u1pre = d_f3.cwiseProduct(lrelu_mask(tr.act_f3));
    g[kWf1] += d_u1pre * tr.u1.transpose();
    g[kBf1].col(0) += d_u1pre.rowwise().sum();
    const MatrixXd d_u1 = w[kWf1].transpose() * d_u1pre;
    d_time += d_u1.bottomRows(C::kTimeDim).rowwise().sum();

    // FP1 interpolation -> pooled2, plus the direct skip into pooled1.
    MatrixXd d_pool2 = MatrixXd::Zero(C::kSa2Out, tr.pooled2.cols());
    for (Eigen::Index i = 0; i < tr.u1.cols(); ++i)
        for (int m = 0; m < tr.fp1[i].count; ++m)
            d_pool2.col(tr.fp1[i].index[m]) +=
                tr.fp1[i].weight[m] * d_u1.col(i).head(C::kSa2Out);
    MatrixXd d_pool1 = d_u1.middleRows(C::kSa2Out, C::kSa1Out);

    // SA2 max-pool and dense layer.
    MatrixXd d_act_g2 = MatrixXd::Zero(C::kSa2Out, tr.act_g2.cols());
    for (Eigen::Index j = 0; j < tr.pooled2.cols(); ++j)
        for (int r = 0; r < C::kSa2Out; ++r) d_act_g2(r, tr.argmax2(r, j)) += d_pool2(r, j);
    const MatrixXd d_g2pre = d_act_g2.cwiseProduct(lrelu_mask(tr.act_g2));
    g[kW2] += d_g2pre * tr.feat_g2.transpose();
    g[kB2].col(0) += d_g2pre.rowwise().sum();
    const MatrixXd d_feat_g2 = w[kW2].transpose() * d_g2pre;
    d_time += d_feat_g2.middleRows(3 + C::kSa1Out, C::kTimeDim).rowwise().sum();

    // Scatter the SA2 group-feature gradient back onto pooled1.
    for (Eigen::Index j = 0; j + 1 < static_cast<Eigen::Index>(tr.g2.offsets.size()); ++j)
        for (int c = tr.g2.offsets[j]; c < tr.g2.offsets[j + 1]; ++c)
            d_pool1.col(tr.g2.members[c]) += d_feat_g2.block<C::kSa1Out, 1>(3, c);

    // SA1 max-pool and the two dense layers.
    MatrixXd d_act_g1b = MatrixXd::Zero(C::kSa1Out, tr.act_g1b.cols());
    for (Eigen::Index j = 0; j < tr.pooled1.cols(); ++j)
        for (int r = 0; r < C::kSa1Out; ++r) d_act_g1b(r, tr.argmax1(r, j)) += d_pool1(r, j);
    const MatrixXd d_g1bpre = d_act_g1b.cwiseProduct(lrelu_mask(tr.act_g1b));
    g[kW1b] += d_g1bpre * tr.act_g1a.transpose();
    g[kB1b].col(0) += d_g1bpre.rowwise().sum();
    const MatrixXd d_act_g1a = w[kW1b].transpose() * d_g1bpre;
    const MatrixXd d_g1apre = d_act_g1a.cwiseProduct(lrelu_mask(tr.act_g1a));
    g[kW1a] += d_g1apre * tr.feat_g1.transpose();
    g[kB1a].col(0) += d_g1apre.rowwise().sum();
    const MatrixXd d_feat_g1 = w[kW1a].transpose() * d_g1apre;
    d_time += d_feat_g1.bottomRows(C::kTimeDim).rowwise().sum();

    // Time-embedding MLP.
    g[kWt2] += d_time * tr.time_hidden.transpose();
    g[kBt2].col(0) += d_time;
    VectorXd d_hidden = w[kWt2].transpose() * d_time;
    d_hidden =
        d_hidden.cwiseProduct(tr.time_hidden.unaryExpr([](double y) { return y > 0.0 ? 1.0 : 0.1; }));
    g[kWt1] += d_hidden * tr.sinus.transpose();
    g[kBt1].col(0) += d_hidden;
}

}  // namespace

const std::vector<TensorSpec>& denoiser_layout() {
    static const std::vector<TensorSpec> layout = build_layout();
    return layout;
}

Eigen::Index denoiser_param_count() {
    const auto& layout = denoiser_layout();
    return layout.back().offset + layout.back().rows * layout.back().cols;
}

Eigen::Map<const Eigen::MatrixXd> DenoiserParams::tensor(int i) const {
    const auto& t = denoiser_layout()[i];
    return {theta.data() + t.offset, t.rows, t.cols};
}

Eigen::Map<Eigen::MatrixXd> DenoiserParams::tensor(int i) {
    const auto& t = denoiser_layout()[i];
    return {theta.data() + t.offset, t.rows, t.cols};
}

DenoiserParams init_denoiser(const DenoiserConfig& config, std::uint64_t seed) {
    DenoiserParams p;
    p.config = config;
    p.init_seed = seed;
    p.theta.setZero(denoiser_param_count());
    Rng rng(seed);
    const auto& layout = denoiser_layout();
    for (int i = 0; i < kTensorCount; ++i) {
        if (layout[i].cols == 1) continue;  // biases stay zero
        if (i == kWh) continue;             // zero head stabilizes early training
        const double stddev = std::sqrt(2.0 / static_cast<double>(layout[i].cols));
        auto m = p.tensor(i);
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = stddev * rng.gaussian();
    }
    return p;
}

Eigen::VectorXd time_embedding(int t, int horizon, const DenoiserParams& params) {
    const ParamView w{params};
    const VectorXd s = sinusoidal_features(t, horizon);
    const VectorXd hidden =
        (w[kWt1] * s + w[kBt1].col(0)).unaryExpr([](double x) { return lrelu(x); });
    return w[kWt2] * hidden + w[kBt2].col(0);
}

std::vector<int> farthest_point_sampling(const Points& points, int k, int start_index) {
    const Eigen::Index n = points.rows();
    if (k < 1 || k > n) throw UserError("farthest_point_sampling: k out of range");
    if (start_index < 0 || start_index >= n)
        throw UserError("farthest_point_sampling: start index out of range");

    std::vector<int> selected;
    selected.reserve(k);
    selected.push_back(start_index);
    VectorXd min_d2 = (points.rowwise() - points.row(start_index)).rowwise().squaredNorm();
    for (int step = 1; step < k; ++step) {
        int best = 0;
        double best_d2 = -1.0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (min_d2[i] > best_d2) {
                best_d2 = min_d2[i];
                best = static_cast<int>(i);
            }
        selected.push_back(best);
        const VectorXd d2 = (points.rowwise() - points.row(best)).rowwise().squaredNorm();
        min_d2 = min_d2.cwiseMin(d2);
    }
    return selected;
}

std::vector<std::vector<int>> ball_query(const Points& centers, const Points& points,
                                         double radius, int max_neighbors) {
    if (radius <= 0.0) throw UserError("ball_query: radius must be positive");
    if (max_neighbors < 1) throw UserError("ball_query: max_neighbors must be >= 1");
    const double r2 = radius * radius;
    std::vector<std::vector<int>> out(centers.rows());
    for (Eigen::Index j = 0; j < centers.rows(); ++j) {
        auto& list = out[j];
        double best_d2 = std::numeric_limits<double>::infinity();
        int best_i = 0;
        for (Eigen::Index i = 0; i < points.rows(); ++i) {
            const double d2 = (points.row(i) - centers.row(j)).squaredNorm();
            if (d2 <= r2 && static_cast<int>(list.size()) < max_neighbors)
                list.push_back(static_cast<int>(i));
            if (d2 < best_d2) {
                best_d2 = d2;
                best_i = static_cast<int>(i);
            }
        }
        if (list.empty()) list.push_back(best_i);          // nearest-point fallback
        while (static_cast<int>(list.size()) < max_neighbors) list.push_back(list.front());
    }
    return out;
}

Points denoise(const Points& xt_free, const Points& c0, int t, const DenoiserParams& params) {
    Trace tr;
    forward(params, xt_free, c0, t, tr);
    return tr.head_out.transpose();
}

DenoiserFn make_denoiser_fn(const DenoiserParams& params) {
    return [&params](const Points& xt_free, const Points& c0, int t) {
        return denoise(xt_free, c0, t, params);
    };
}

double example_loss(const DenoiserParams& params, const TrainExample& example, int t,
                    const Points& eps, const DiffusionSchedule& sched) {
    const Points xt = forward_sample(example.free_points, t, eps, sched);
    Trace tr;
    forward(params, xt, example.condition, t, tr);
    const Eigen::MatrixXd diff = tr.head_out - eps.transpose();
    return diff.squaredNorm() / static_cast<double>(eps.rows());
}

double example_loss_grad(const DenoiserParams& params, const TrainExample& example, int t,
                         const Points& eps, const DiffusionSchedule& sched,
                         Eigen::VectorXd& grad) {
    const Points xt = forward_sample(example.free_points, t, eps, sched);
    Trace tr;
    forward(params, xt, example.condition, t, tr);
    const Eigen::MatrixXd diff = tr.head_out - eps.transpose();
    const double loss = diff.squaredNorm() / static_cast<double>(eps.rows());
    const Eigen::MatrixXd d_head = (2.0 / static_cast<double>(eps.rows())) * diff;
    backward(params, tr, d_head, grad);
    return loss;
}

double loss_gradient(const DenoiserParams& params, const std::vector<TrainExample>& batch,
                     const DiffusionSchedule& sched, Rng& rng, Eigen::VectorXd& grad) {
    if (batch.empty()) throw UserError("loss_gradient: empty batch");
    grad.setZero(denoiser_param_count());
    double loss = 0.0;
    for (const auto& example : batch) {
        const int t = 1 + static_cast<int>(rng.uniform_index(sched.timesteps));
        const Points eps = gaussian_points(example.free_points.rows(), rng);
        loss += example_loss_grad(params, example, t, eps, sched, grad);
    }
    grad /= static_cast<double>(batch.size());
    if (!std::isfinite(loss)) throw UserError("loss_gradient: non-finite loss");
    return loss / static_cast<double>(batch.size());
}

FitResult fit(const DenoiserParams& params, const std::vector<TrainExample>& dataset,
              const TrainConfig& config, const DiffusionSchedule& sched, std::uint64_t seed) {
    if (dataset.empty()) throw UserError("fit: empty dataset");
    if (config.batch_size < 1) throw UserError("fit: batch size must be >= 1");
    if (config.learning_rate < 0.0) throw UserError("fit: negative learning rate");

    constexpr std::uint64_t kShuffleStream = 0x100000000ull;
    constexpr std::uint64_t kDrawStream = 0x200000000ull;

    FitResult result;
    result.params = params;
    const Eigen::Index dim = denoiser_param_count();
    VectorXd m = VectorXd::Zero(dim), v = VectorXd::Zero(dim);
    long step = 0;

    const int threads = config.threads > 0
                            ? config.threads
                            : std::max(1u, std::thread::hardware_concurrency());

    std::vector<int> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng shuffle_rng(seed, kShuffleStream + static_cast<std::uint64_t>(epoch));
        std::iota(order.begin(), order.end(), 0);
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        for (std::size_t batch_start = 0; batch_start < order.size();
             batch_start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t batch_end =
                std::min(order.size(), batch_start + static_cast<std::size_t>(config.batch_size));
            const int batch_n = static_cast<int>(batch_end - batch_start);

            // Per-item draws come from item-position streams, so parallel
            // evaluation with in-order reduction is bit-identical to serial.
            std::vector<VectorXd> item_grads(batch_n);
            std::vector<double> item_losses(batch_n);
            auto eval_item = [&](int bi) {
                const std::size_t pos = batch_start + static_cast<std::size_t>(bi);
                Rng draw_rng(seed, kDrawStream + static_cast<std::uint64_t>(epoch) *
                                                     dataset.size() +
                                       pos);
                const auto& example = dataset[static_cast<std::size_t>(order[pos])];
                const int t = 1 + static_cast<int>(draw_rng.uniform_index(sched.timesteps));
                const Points eps = gaussian_points(example.free_points.rows(), draw_rng);
                item_grads[bi] = VectorXd::Zero(dim);
                item_losses[bi] = example_loss_grad(result.params, example, t, eps, sched,
                                                    item_grads[bi]);
            };
            try {
                if (threads > 1 && batch_n > 1) {
                    std::vector<std::future<void>> futures;
                    futures.reserve(batch_n);
                    for (int bi = 0; bi < batch_n; ++bi)
                        futures.push_back(std::async(std::launch::async, eval_item, bi));
                    for (auto& f : futures) f.get();
                } else {
                    for (int bi = 0; bi < batch_n; ++bi) eval_item(bi);
                }
            } catch (const InternalError&) {
                // Parameters left the finite range; report it as divergence.
                throw UserError("fit: training diverged at epoch " + std::to_string(epoch));
            }

            VectorXd grad = VectorXd::Zero(dim);
            double batch_loss = 0.0;
            for (int bi = 0; bi < batch_n; ++bi) {
                grad += item_grads[bi];
                batch_loss += item_losses[bi];
            }
            grad /= batch_n;
            batch_loss /= batch_n;
            epoch_loss += batch_loss * batch_n;

            if (!std::isfinite(batch_loss))
                throw UserError("fit: training diverged at epoch " + std::to_string(epoch));

            ++step;
            m = config.adam_beta1 * m + (1.0 - config.adam_beta1) * grad;
            v = config.adam_beta2 * v + (1.0 - config.adam_beta2) * grad.cwiseProduct(grad);
            const double mc = 1.0 - std::pow(config.adam_beta1, static_cast<double>(step));
            const double vc = 1.0 - std::pow(config.adam_beta2, static_cast<double>(step));
            result.params.theta -=
                (config.learning_rate / mc) *
                (m.array() / ((v.array() / vc).sqrt() + config.adam_eps)).matrix();
        }
        result.epoch_loss.push_back(epoch_loss / static_cast<double>(dataset.size()));
    }
    return result;
}

}  // namespace implantgen
