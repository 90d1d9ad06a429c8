#include <doctest.h>

#include <random>

#include "aoismpc/errors.hpp"
#include "aoismpc/prediction.hpp"

using namespace aoismpc;

namespace {

MatrixXd randn(std::mt19937_64& rng, int r, int c, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = n(rng);
    return m;
}

DisturbanceModel iid(int nw, int H, double v = 1.0) {
    return {std::vector<MatrixXd>(static_cast<std::size_t>(H), v * MatrixXd::Identity(nw, nw))};
}

}  // namespace

TEST_CASE("scalar stacked matrices by hand") {
    const LinearPlant p{MatrixXd::Constant(1, 1, 2.0), MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 1)};
    const StackedSystem ss = build_stacked(p, iid(1, 2), 2);
    CHECK(ss.bigA == (MatrixXd(3, 1) << 1, 2, 4).finished());
    CHECK(ss.bigC == (MatrixXd(3, 2) << 0, 0, 1, 0, 2, 1).finished());
    CHECK(ss.bigB == ss.bigC);
}

TEST_CASE("identity A gives identity blocks below the diagonal") {
    const LinearPlant p{MatrixXd::Identity(2, 2), MatrixXd::Ones(2, 1), MatrixXd::Ones(2, 1)};
    const StackedSystem ss = build_stacked(p, iid(1, 3), 3);
    for (int i = 0; i <= 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const MatrixXd blk = ss.bigC.block(2 * i, 2 * j, 2, 2);
            CHECK(blk == (i > j ? MatrixXd(MatrixXd::Identity(2, 2)) : MatrixXd(MatrixXd::Zero(2, 2))));
        }
    }
}

TEST_CASE("stacked trajectory matches the recursion") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
        const int nx = 1 + t % 4, nu = 1 + (t / 4) % 3, nw = 1 + t % 2, H = 1 + t % 7;
        const LinearPlant p{randn(rng, nx, nx, 0.6), randn(rng, nx, nu), randn(rng, nx, nw)};
        const StackedSystem ss = build_stacked(p, iid(nw, H), H);
        const VectorXd x0 = randn(rng, nx, 1), u = randn(rng, H * nu, 1), w = randn(rng, H * nw, 1);
        const VectorXd x = stacked_trajectory(ss, x0, u, w);
        VectorXd xk = x0;
        for (int k = 0; k < H; ++k) {
            CHECK((x.segment(k * nx, nx) - xk).lpNorm<Eigen::Infinity>() < 1e-10);
            xk = p.A * xk + p.B * u.segment(k * nu, nu) + p.E * w.segment(k * nw, nw);
        }
        CHECK((x.segment(H * nx, nx) - xk).lpNorm<Eigen::Infinity>() < 1e-10);
        // causality: column block j of bigE touches only state blocks k > j
        for (int j = 0; j < H; ++j) {
            CHECK(ss.bigE.block(0, j * nw, (j + 1) * nx, nw).isZero(0.0));
        }
    }
    const LinearPlant p{MatrixXd::Identity(2, 2), MatrixXd::Ones(2, 1), MatrixXd::Ones(2, 1)};
    CHECK_THROWS_AS(stacked_trajectory(build_stacked(p, iid(1, 2), 2), VectorXd::Zero(3), VectorXd::Zero(2),
                                       VectorXd::Zero(2)),
                    DimensionMismatch);
}

TEST_CASE("impulse response") {
    std::mt19937_64 rng(8);
    const LinearPlant p{randn(rng, 3, 3, 0.5), randn(rng, 3, 1), randn(rng, 3, 1)};
    const StackedSystem ss = build_stacked(p, iid(1, 4), 4);
    VectorXd u = VectorXd::Zero(4);
    u(0) = 1.0;
    const VectorXd x = stacked_trajectory(ss, VectorXd::Zero(3), u, VectorXd::Zero(4));
    MatrixXd Ak = MatrixXd::Identity(3, 3);
    for (int k = 1; k <= 4; ++k) {
        CHECK((x.segment(3 * k, 3) - Ak * p.B).norm() < 1e-12);
        Ak = p.A * Ak;
    }
}

TEST_CASE("close_loop special cases") {
    std::mt19937_64 rng(4);
    const int nx = 2, nu = 2, nw = 1, H = 4;
    const LinearPlant p{randn(rng, nx, nx, 0.5), randn(rng, nx, nu), randn(rng, nx, nw)};
    const StackedSystem ss = build_stacked(p, iid(nw, H), H);
    FeedbackPolicy pol;
    pol.V = MatrixXd::Zero(H * nu, nx);
    pol.M = MatrixXd::Zero(H * nu, H * nw);
    pol.support_mask = IndicatorMatrix::full(H, nu, nw);
    ClosedLoop cl = close_loop(ss, pol, IndicatorMatrix::full(H, nu, nw));
    CHECK(cl.calA == ss.bigA);
    CHECK(cl.scrE == ss.bigE);

    pol.V = randn(rng, H * nu, nx);
    pol.M = masked_feedback(randn(rng, H * nu, H * nw), IndicatorMatrix::full(H, nu, nw));
    cl = close_loop(ss, pol, IndicatorMatrix(H, nu, nw));
    CHECK(cl.scrE == ss.bigE);

    // M supported on a sub-pattern: full P and the sub-pattern give the same scrE
    IndicatorMatrix sub(H, nu, nw);
    sub.set(2, 0, true);
    sub.set(3, 0, true);
    sub.set(3, 1, true);
    pol.M = masked_feedback(randn(rng, H * nu, H * nw), sub);
    CHECK(close_loop(ss, pol, IndicatorMatrix::full(H, nu, nw)).scrE == close_loop(ss, pol, sub).scrE);
}

TEST_CASE("moments against the per-step covariance recursion") {
    const LinearPlant p{MatrixXd::Constant(1, 1, 0.9), MatrixXd::Ones(1, 1), MatrixXd::Constant(1, 1, 0.5)};
    DisturbanceModel d;
    for (int k = 0; k < 5; ++k) d.covariances.push_back(MatrixXd::Constant(1, 1, 0.1 * (k + 1)));
    const StackedSystem ss = build_stacked(p, d, 5);
    FeedbackPolicy pol{MatrixXd::Zero(5, 1), MatrixXd::Zero(5, 5), IndicatorMatrix(5)};
    const auto m = trajectory_moments(close_loop(ss, pol, IndicatorMatrix(5)), ss.bigW, VectorXd::Ones(1));
    double var = 0.0;
    for (int k = 0; k <= 5; ++k) {
        CHECK(m.covariance(k, k) == doctest::Approx(var).epsilon(1e-12));
        CHECK(m.mean(k) == doctest::Approx(std::pow(0.9, k)).epsilon(1e-12));
        if (k < 5) var = 0.81 * var + 0.25 * d.covariances[k](0, 0);
    }
    const auto zero = trajectory_moments(close_loop(ss, pol, IndicatorMatrix(5)), MatrixXd::Zero(5, 5),
                                         VectorXd::Ones(1));
    CHECK(zero.covariance.isZero(0.0));
}

TEST_CASE("Monte Carlo moments") {
    std::mt19937_64 rng(21);
    const int nx = 2, nw = 2, H = 3;
    const LinearPlant p{randn(rng, nx, nx, 0.5), randn(rng, nx, 1), MatrixXd::Identity(nx, nw)};
    const StackedSystem ss = build_stacked(p, iid(nw, H, 0.3), H);
    FeedbackPolicy pol{randn(rng, H, nx), masked_feedback(randn(rng, H, H * nw), IndicatorMatrix::full(H, 1, nw)),
                       IndicatorMatrix::full(H, 1, nw)};
    const ClosedLoop cl = close_loop(ss, pol, IndicatorMatrix::full(H, 1, nw));
    const VectorXd x0 = VectorXd::Ones(nx);
    const auto m = trajectory_moments(cl, ss.bigW, x0);
    const int N = 100000;
    const Eigen::Index n = m.mean.size();
    VectorXd mean = VectorXd::Zero(n);
    MatrixXd second = MatrixXd::Zero(n, n);
    std::normal_distribution<double> g(0.0, std::sqrt(0.3));
    for (int i = 0; i < N; ++i) {
        VectorXd w(H * nw);
        for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = g(rng);
        const VectorXd x = cl.calA * x0 + cl.scrE * w;
        mean += x;
        second += x * x.transpose();
    }
    mean /= N;
    const MatrixXd cov = second / N - mean * mean.transpose();
    const double scale = m.covariance.diagonal().maxCoeff();
    CHECK((mean - m.mean).lpNorm<Eigen::Infinity>() < 5.0 * std::sqrt(scale / N));
    CHECK((cov - m.covariance).lpNorm<Eigen::Infinity>() < 0.05 * scale);
}

TEST_CASE("nominal prediction") {
    std::mt19937_64 rng(9);
    const LinearPlant p{randn(rng, 2, 2), randn(rng, 2, 1), randn(rng, 2, 1)};
    const VectorXd xl = randn(rng, 2, 1);
    CHECK(nominal_state(p, xl, {}) == xl);
    std::vector<VectorXd> zeros(3, VectorXd::Zero(1));
    CHECK((nominal_state(p, xl, zeros) - p.A * p.A * p.A * xl).norm() < 1e-12);
    std::vector<VectorXd> us{randn(rng, 1, 1), randn(rng, 1, 1)};
    const VectorXd rec = p.A * (p.A * xl + p.B * us[0]) + p.B * us[1];
    CHECK((nominal_state(p, xl, us) - rec).norm() < 1e-12);
}

TEST_CASE("realization tag") {
    CHECK(realization_tag(IndicatorMatrix::full(4)) == "P[1|11|111]");
}
