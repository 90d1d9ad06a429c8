#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "aoismpc/errors.hpp"
#include "aoismpc/sim.hpp"
#include "scenario.hpp"

using namespace aoismpc;

namespace {

FeedbackPolicy ramp_policy(int H) {
    FeedbackPolicy p;
    p.V = MatrixXd::Constant(H, 2, 0.1);
    p.M = MatrixXd::Zero(H, H);
    p.support_mask = IndicatorMatrix::full(H);
    for (int k = 0; k < H; ++k)
        for (int r = 0; r < k; ++r) p.M(k, r) = 1.0 + k + 0.1 * r;
    return p;
}

const SynthesisResult& desk_result() {
    static const SynthesisResult r = synthesize(validate(testing::double_integrator()), testing::desk_channel(),
                                                {SolverSettings{}, BetaRule::Adaptive});
    return r;
}

}  // namespace

TEST_CASE("reconstruction") {
    LinearPlant p{MatrixXd::Identity(2, 2) * 0.5, MatrixXd::Ones(2, 1), MatrixXd::Identity(2, 2)};
    const VectorXd x = VectorXd::Ones(2), u = VectorXd::Ones(1);
    const VectorXd xn = (VectorXd(2) << 3, -1).finished();
    CHECK((reconstruct_disturbance(p, x, u, xn) - (xn - p.A * x - p.B * u)).norm() < 1e-15);

    p.E = (MatrixXd(2, 1) << 0.5, 1).finished();
    const VectorXd w = VectorXd::Constant(1, -0.37);
    const VectorXd next = p.A * x + p.B * u + p.E * w;
    CHECK((reconstruct_disturbance(p, x, u, next) - w).norm() < 1e-12);
    CHECK_THROWS_AS(reconstruct_disturbance(p, x, u, next + (VectorXd(2) << 1, -0.5).finished()),
                    ReconstructionResidual);

    p.E = (MatrixXd(2, 2) << 1, 2, 2, 4).finished();
    CHECK_THROWS_AS(check_reconstructible(p), RankDeficientE);
}

TEST_CASE("control step cases") {
    const int H = 4;
    const FeedbackPolicy pol = ramp_policy(H);
    const VectorXd x0 = VectorXd::Ones(2);
    const std::vector<VectorXd> w{VectorXd::Constant(1, 1.0), VectorXd::Constant(1, 2.0), VectorXd::Constant(1, 3.0)};

    FeedbackPolicy open = pol;
    open.support_mask = IndicatorMatrix(H);
    const auto dead = ChannelTrace::from_path({0, 1, 2, 3});
    const auto c0 = control_step(open, 3, x0, w, dead);
    CHECK(c0.beta_applicable);
    CHECK(c0.u(0) == doctest::Approx(0.2));

    // full information on a beta pattern with only (3,0)
    FeedbackPolicy partial = pol;
    partial.support_mask = IndicatorMatrix(H);
    partial.support_mask.set(3, 0, true);
    const auto full = ChannelTrace::from_path({0, 0, 0, 0});
    const auto c1 = control_step(partial, 3, x0, w, full);
    CHECK(c1.beta_applicable);
    CHECK(c1.u(0) == doctest::Approx(0.2 + 4.0 * 1.0));

    // one required disturbance missing: truncated sum, flag cleared
    const auto lossy = ChannelTrace::from_path({0, 0, 1, 2});  // l_3 = 1
    const auto c2 = control_step(pol, 3, x0, w, lossy);
    CHECK_FALSE(c2.beta_applicable);
    CHECK(c2.u(0) == doctest::Approx(0.2 + 4.0 * 1.0));
}

TEST_CASE("zero noise on a perfect channel follows the nominal trajectory") {
    auto s = testing::double_integrator(4);
    s.disturbance.covariances = {MatrixXd::Zero(1, 1)};
    const ValidatedProblem p = validate(s);
    SynthesisResult r;
    r.policy = ramp_policy(4);
    r.policy.V.col(1).setZero();
    r.policy.V.col(0).setConstant(-0.05);
    r.beta = select_beta(build_aoi_table(one_link_chain(1.0, 5), 4), 0.8, 0.8);
    SimulationOptions opt;
    opt.n_runs = 50;
    opt.keep_records = true;
    const auto out = run_closed_loop(r, p, one_link_chain(1.0, 5), opt);
    const auto ss = build_stacked(p.plant(), p.spec().disturbance, 4);
    const VectorXd nominal = close_loop(ss, r.policy, IndicatorMatrix::full(4)).calA * p.x0();
    for (const auto& rec : out.records) {
        for (int k = 0; k <= 4; ++k) CHECK((rec.x[k] - nominal.segment(2 * k, 2)).norm() < 1e-12);
    }
    for (const auto& row : empirical_rates(out.report)) {
        CHECK(row.state == 1.0);
        CHECK(row.state_se == 0.0);
    }
}

TEST_CASE("run records satisfy the plant recursion") {
    const ValidatedProblem p = validate(testing::double_integrator());
    SimulationOptions opt;
    opt.n_runs = 200;
    opt.keep_records = true;
    const auto out = run_closed_loop(desk_result(), p, testing::desk_channel(), opt);
    for (const auto& rec : out.records) {
        for (std::size_t k = 0; k < rec.u.size(); ++k) {
            const VectorXd step = p.plant().A * rec.x[k] + p.plant().B * rec.u[k] + p.plant().E * rec.w[k];
            CHECK((rec.x[k + 1] - step).norm() < 1e-9);
            CHECK((rec.w_hat[k] - rec.w[k]).norm() < 1e-12);
        }
        for (std::size_t k = 1; k < rec.trace.available.size(); ++k) {
            CHECK(rec.trace.available[k] >= rec.trace.available[k - 1]);
        }
    }
}

TEST_CASE("parallel and serial reports agree exactly") {
    const ValidatedProblem p = validate(testing::double_integrator());
    SimulationOptions opt;
    opt.n_runs = 3000;
    opt.seed = 99;
    const auto a = run_closed_loop(desk_result(), p, testing::desk_channel(), opt).report;
    const auto b = run_closed_loop_serial(desk_result(), p, testing::desk_channel(), opt).report;
    CHECK(a.state_ok == b.state_ok);
    CHECK(a.input_ok == b.input_ok);
    CHECK(a.beta_through == b.beta_through);
    CHECK(a.mean == b.mean);
    CHECK(a.covariance == b.covariance);
    CHECK(a.mean_cost == b.mean_cost);

    setenv("AOISMPC_THREADS", "1", 1);
    const auto c = run_closed_loop(desk_result(), p, testing::desk_channel(), opt).report;
    unsetenv("AOISMPC_THREADS");
    CHECK(c.mean == a.mean);

    opt.seed = 100;
    const auto d = run_closed_loop(desk_result(), p, testing::desk_channel(), opt).report;
    CHECK_FALSE(d.mean == a.mean);
}

TEST_CASE("rates arithmetic and recount") {
    SimulationReport rep;
    rep.n_runs = 100;
    rep.H = 1;
    rep.state_ok = {100, 50};
    rep.input_ok = {50};
    rep.beta_applicable = {100};
    rep.beta_through = {100};
    rep.state_ok_given_beta = {50};
    rep.input_ok_given_beta = {50};
    const auto rows = empirical_rates(rep);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].state == 1.0);
    CHECK(rows[0].state_se == 0.0);
    CHECK(rows[1].state == 0.5);
    CHECK(rows[1].state_se == doctest::Approx(0.05));
    CHECK(std::isnan(rows[1].input));
    CHECK(std::isnan(rows[0].state_given_beta));

    const ValidatedProblem p = validate(testing::double_integrator());
    SimulationOptions opt;
    opt.n_runs = 2000;
    opt.keep_records = true;
    const auto out = run_closed_loop(desk_result(), p, testing::desk_channel(), opt);
    const auto table = empirical_rates(out.report);
    for (int k = 0; k < p.horizon(); ++k) {
        long s = 0, u = 0, b = 0;
        for (const auto& rec : out.records) {
            s += rec.state_ok[k];
            u += rec.input_ok[k];
            b += rec.beta_applicable[k];
        }
        CHECK(table[k].state == doctest::Approx(s / 2000.0));
        CHECK(table[k].input == doctest::Approx(u / 2000.0));
        CHECK(table[k].beta == doctest::Approx(b / 2000.0));
    }
}
