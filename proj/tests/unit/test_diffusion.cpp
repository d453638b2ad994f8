#include <doctest.h>

#include <cmath>

#include "implantgen/diffusion.hpp"

using namespace implantgen;

namespace {

Points zeros(Eigen::Index n) { return Points::Zero(n, 3); }

const DenoiserFn kZeroDenoiser = [](const Points& xt, const Points&, int) {
    return Points(Points::Zero(xt.rows(), 3));
};

}  // namespace

TEST_CASE("schedule endpoints and tables") {
    const DiffusionSchedule s = make_schedule(1000, 1e-4, 0.02);
    CHECK(s.beta_at(1) == doctest::Approx(1e-4).epsilon(1e-15));
    CHECK(s.beta_at(1000) == doctest::Approx(0.02).epsilon(1e-15));

    // Independent extended-precision running product.
    long double running = 1.0L;
    double max_diff = 0.0;
    for (int t = 1; t <= 1000; ++t) {
        const long double beta =
            1e-4L + (0.02L - 1e-4L) * static_cast<long double>(t - 1) / 999.0L;
        running *= (1.0L - beta);
        max_diff = std::max(max_diff,
                            std::abs(static_cast<double>(running) - s.alpha_bar_at(t)));
    }
    CHECK(max_diff <= 1e-12);

    for (int t = 2; t <= 1000; ++t) {
        CHECK(s.alpha_bar_at(t) < s.alpha_bar_at(t - 1));
        CHECK(s.beta_at(t) > s.beta_at(t - 1));
    }
    CHECK(s.alpha_bar_at(1) < 1.0);

    const DiffusionSchedule one = make_schedule(1, 0.3, 0.3);
    CHECK(one.alpha_bar_at(1) == doctest::Approx(0.7).epsilon(1e-15));

    CHECK_THROWS_AS(make_schedule(0, 1e-4, 0.02), UserError);
    CHECK_THROWS_AS(make_schedule(10, 0.0, 0.02), UserError);
    CHECK_THROWS_AS(make_schedule(10, 0.5, 0.2), UserError);
    CHECK_THROWS_AS(make_schedule(10, 1e-4, 1.0), UserError);
}

TEST_CASE("forward sample closed form") {
    const DiffusionSchedule s = make_schedule(100, 1e-3, 0.2);
    Points x0(4, 3);
    x0 << 1, 2, 3, -1, 0, 1, 0.5, -0.5, 2, 0, 0, 0;

    const Points shrunk = forward_sample(x0, 50, zeros(4), s);
    CHECK((shrunk - std::sqrt(s.alpha_bar_at(50)) * x0).cwiseAbs().maxCoeff() < 1e-15);

    Rng rng(7);
    const Points eps = gaussian_points(4, rng);
    const Points from_zero = forward_sample(zeros(4), 50, eps, s);
    CHECK((from_zero - std::sqrt(1.0 - s.alpha_bar_at(50)) * eps).cwiseAbs().maxCoeff() < 1e-15);

    CHECK_THROWS_AS(forward_sample(x0, 0, zeros(4), s), UserError);
    CHECK_THROWS_AS(forward_sample(x0, 101, zeros(4), s), UserError);
    CHECK_THROWS_AS(forward_sample(x0, 50, zeros(3), s), UserError);
}

TEST_CASE("forward sample monte carlo statistics") {
    const DiffusionSchedule s = make_schedule(1000, 1e-4, 0.02);
    const int t = 500;
    const double x0v = 0.8;
    Points x0(1, 3);
    x0.setConstant(x0v);

    Rng rng(123);
    const int draws = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < draws; ++i) {
        const Points eps = gaussian_points(1, rng);
        const Points xt = forward_sample(x0, t, eps, s);
        sum += xt(0, 0);
        sum2 += xt(0, 0) * xt(0, 0);
    }
    const double mean = sum / draws;
    const double var = sum2 / draws - mean * mean;
    CHECK(std::abs(mean - std::sqrt(s.alpha_bar_at(t)) * x0v) < 0.02 * std::abs(x0v));
    CHECK(std::abs(var - (1.0 - s.alpha_bar_at(t))) / (1.0 - s.alpha_bar_at(t)) < 0.02);
}

TEST_CASE("training loss oracle values") {
    const DiffusionSchedule s = make_schedule(100, 1e-3, 0.2);
    PointCloud x0;
    x0.points.resize(40, 3);
    x0.points.setZero();
    x0.split = 8;
    const Eigen::Index m = 32;

    Rng rng(9);
    const Points eps = gaussian_points(m, rng);

    // A denoiser that returns exactly the drawn noise: loss 0.
    const DenoiserFn perfect = [&eps](const Points&, const Points&, int) { return eps; };
    CHECK(training_loss(perfect, x0, 10, eps, s) == doctest::Approx(0.0).epsilon(1e-18));

    // A zero denoiser: loss is the mean squared noise norm, about 3/point.
    double expected = eps.squaredNorm() / static_cast<double>(m);
    CHECK(training_loss(kZeroDenoiser, x0, 10, eps, s) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(3.0).epsilon(0.4));
    CHECK(training_loss(kZeroDenoiser, x0, 10, eps, s) >= 0.0);
}

TEST_CASE("reverse step formula") {
    DiffusionSchedule s;
    s.timesteps = 2;
    s.beta.resize(2);
    s.alpha.resize(2);
    s.alpha_bar.resize(2);
    s.beta << 0.01, 0.01;
    s.alpha << 0.99, 0.99;
    s.alpha_bar << 0.99, 0.5;

    Points x(1, 3);
    x.setConstant(1.0);

    // eps_hat = 0, z = 0: pure rescale by 1/sqrt(alpha).
    const Points rescaled = reverse_step(x, Points(0, 3), 2, zeros(1), kZeroDenoiser, s);
    CHECK(rescaled(0, 0) == doctest::Approx(1.0 / std::sqrt(0.99)).epsilon(1e-15));

    // Hand-set scalars: (1/sqrt(0.99)) * (1 - 0.01/sqrt(0.5)).
    const DenoiserFn ones = [](const Points& xt, const Points&, int) {
        return Points(Points::Ones(xt.rows(), 3));
    };
    const Points stepped = reverse_step(x, Points(0, 3), 2, zeros(1), ones, s);
    const double expected = (1.0 - 0.01 / std::sqrt(0.5)) / std::sqrt(0.99);
    CHECK(stepped(0, 0) == doctest::Approx(expected).epsilon(1e-14));

    CHECK_THROWS_AS(reverse_step(x, Points(0, 3), 3, zeros(1), kZeroDenoiser, s), UserError);
    Points nonzero(1, 3);
    nonzero.setConstant(0.5);
    CHECK_THROWS_AS(reverse_step(x, Points(0, 3), 1, nonzero, kZeroDenoiser, s), UserError);
}

TEST_CASE("teacher denoiser inverts the final forward step exactly") {
    const DiffusionSchedule s = make_schedule(50, 1e-3, 0.1);
    Rng rng(21);
    const Points x0 = gaussian_points(6, rng);
    const Points eps = gaussian_points(6, rng);
    const Points x1 = forward_sample(x0, 1, eps, s);
    const DenoiserFn teacher = [&eps](const Points&, const Points&, int) { return eps; };
    const Points back = reverse_step(x1, Points(0, 3), 1, Points(0, 3), teacher, s);
    CHECK((back - x0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("completion holds condition points fixed and is deterministic") {
    const DiffusionSchedule s = make_schedule(40, 1e-3, 0.1);
    Rng rng(33);
    const Points c0 = gaussian_points(20, rng);

    // The denoiser sees the condition but must not be able to change it.
    const DenoiserFn drift = [](const Points& xt, const Points& c, int) {
        Points out = 0.1 * xt;
        out.rowwise() += 0.01 * c.colwise().mean();
        return out;
    };

    const PointCloud a = complete(c0, 12, drift, s, 99);
    const PointCloud b = complete(c0, 12, drift, s, 99);
    CHECK(a.split == 20);
    CHECK(a.count() == 32);
    CHECK((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);
    // Bitwise identical condition block.
    CHECK((a.points.topRows(20).array() == c0.array()).all());

    const PointCloud c = complete(c0, 12, drift, s, 100);
    CHECK((a.points.bottomRows(12) - c.points.bottomRows(12)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("completion at the full-scale point budget keeps the split") {
    const DiffusionSchedule s = make_schedule(3, 1e-3, 0.1);
    Points c0 = Points::Zero(27648, 3);
    const PointCloud out = complete(c0, 3072, kZeroDenoiser, s, 1);
    CHECK(out.count() == 30720);
    CHECK(out.split == 27648);
}
