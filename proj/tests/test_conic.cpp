#include <doctest.h>

#include <sstream>

#include "aoismpc/conic.hpp"
#include "aoismpc/synthesis.hpp"
#include "scenario.hpp"

using namespace aoismpc;

namespace {

ConicProblem with_vars(int n) {
    ConicProblem p;
    p.variables.assign(static_cast<std::size_t>(n), {VarKind::V, 0, 0});
    for (int i = 0; i < n; ++i) p.variables[static_cast<std::size_t>(i)].row = i;
    p.objective = VectorXd::Zero(n);
    return p;
}

LmiBlock block(std::string name, MatrixXd F0, std::vector<std::pair<int, MatrixXd>> terms) {
    return {std::move(name), std::move(F0), std::move(terms)};
}

}  // namespace

TEST_CASE("minimize x with [x] >= 0") {
    ConicProblem p = with_vars(1);
    p.objective(0) = 1.0;
    p.psd_blocks.push_back(block("x", MatrixXd::Zero(1, 1), {{0, MatrixXd::Ones(1, 1)}}));
    const Solution s = solve(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(std::abs(s.values(0)) < 1e-7);
}

TEST_CASE("minimize t with [[t,1],[1,t]] >= 0") {
    ConicProblem p = with_vars(1);
    p.objective(0) = 1.0;
    p.psd_blocks.push_back(block("t", (MatrixXd(2, 2) << 0, 1, 1, 0).finished(), {{0, MatrixXd::Identity(2, 2)}}));
    const Solution s = solve(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.values(0) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("diagonal instance with optimum a max of ratios") {
    // minimize z0 + 2 z1 + 3 z2 with diag(z0 - 1, 2 z1 - 1 - z0, z2 - 0.5) >= 0 and z2 <= 4:
    // z0 = 1, z1 = 1, z2 = 0.5 -> 1 + 2 + 1.5 = 4.5
    ConicProblem p = with_vars(3);
    p.objective << 1, 2, 3;
    auto e = [](int i) {
        MatrixXd m = MatrixXd::Zero(3, 3);
        m(i, i) = 1.0;
        return m;
    };
    MatrixXd F0 = MatrixXd::Zero(3, 3);
    F0.diagonal() << -1, -1, -0.5;
    p.psd_blocks.push_back(block("diag", F0, {{0, e(0) - e(1)}, {1, 2 * e(1)}, {2, e(2)}}));
    p.nonneg.push_back({"cap", 4.0, {{2, -1.0}}});
    const Solution s = solve(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(4.5).epsilon(1e-6));
}

TEST_CASE("second-order cone epigraph") {
    // minimize t with ||(x - 3, x + 1)|| <= t -> x = 1, t = 2 sqrt 2
    ConicProblem p = with_vars(2);
    p.objective(1) = 1.0;
    SocBlock soc;
    soc.name = "soc";
    soc.y0 = (VectorXd(2) << -3, 1).finished();
    soc.t_terms = {{1, 1.0}};
    soc.y_terms = {{0, VectorXd::Ones(2)}};
    p.soc_blocks.push_back(soc);
    const Solution s = solve(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.values(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(s.objective == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-7));
}

TEST_CASE("infeasible problem names the violated block") {
    ConicProblem p = with_vars(1);
    p.objective(0) = 1.0;
    p.psd_blocks.push_back(block("upper", MatrixXd::Constant(1, 1, 1.0), {{0, -MatrixXd::Ones(1, 1)}}));
    p.psd_blocks.push_back(block("lower", MatrixXd::Constant(1, 1, -3.0), {{0, MatrixXd::Ones(1, 1)}}));
    const Solution s = solve(p);
    CHECK(s.status == SolveStatus::Infeasible);
    CHECK((s.violated_block == "upper" || s.violated_block == "lower"));
}

TEST_CASE("verifier") {
    ConicProblem empty;
    CHECK(verify_solution(empty, Solution{}, 1e-9).passed);

    ConicProblem p = with_vars(1);
    p.objective(0) = 1.0;
    p.psd_blocks.push_back(block("slack", MatrixXd::Constant(1, 1, 0.0), {{0, MatrixXd::Ones(1, 1)}}));
    p.psd_blocks.push_back(block("loose", MatrixXd::Constant(1, 1, 5.0), {{0, MatrixXd::Ones(1, 1)}}));
    Solution s;
    s.values = VectorXd::Zero(1);
    s.status = SolveStatus::Optimal;
    CHECK(verify_solution(p, s, 1e-9).passed);
    s.values(0) = -10 * 1e-9;  // doctored: status says Optimal, block violated
    const auto rep = verify_solution(p, s, 1e-9);
    CHECK_FALSE(rep.passed);
    CHECK(rep.worst_block == "slack");
}

TEST_CASE("dump round trip is bit identical") {
    const ValidatedProblem problem = validate(testing::double_integrator(4));
    const auto beta = select_beta(build_aoi_table(testing::desk_channel(), 4), 0.8, 0.8, BetaRule::Adaptive);
    const ConicProblem p = assemble_sdp(problem, beta).problem;
    std::stringstream ss;
    dump_problem(p, ss);
    const ConicProblem q = load_problem(ss);
    CHECK(p == q);
    std::stringstream again;
    dump_problem(q, again);
    std::stringstream first;
    dump_problem(p, first);
    CHECK(first.str() == again.str());
}

TEST_CASE("check rejects bad indices and asymmetry") {
    ConicProblem p = with_vars(1);
    p.psd_blocks.push_back(block("bad", MatrixXd::Zero(1, 1), {{3, MatrixXd::Ones(1, 1)}}));
    CHECK_THROWS_AS(p.check(), std::invalid_argument);
    p.psd_blocks = {block("asym", (MatrixXd(2, 2) << 0, 1, 0, 0).finished(), {})};
    CHECK_THROWS_AS(p.check(), std::invalid_argument);
}
