#include "aoismpc/synthesis.hpp"

#include <cmath>

#include "aoismpc/errors.hpp"

namespace aoismpc {
namespace {

MatrixXd psd_sqrt(const MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()));
    const VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd block_diag(const std::vector<MatrixXd>& parts) {
    Eigen::Index n = 0;
    for (const auto& p : parts) n += p.rows();
    MatrixXd out = MatrixXd::Zero(n, n);
    Eigen::Index off = 0;
    for (const auto& p : parts) {
        out.block(off, off, p.rows(), p.cols()) = p;
        off += p.rows();
    }
    return out;
}

}  // namespace

int SdpLayout::num_structural_vars() const {
    const int ns = (H + 1) * nx;
    return static_cast<int>(V_index.size() + M_index.size()) + ns * (ns + 1) / 2;
}

std::string lmi_family(const std::string& block_name) { return block_name.substr(0, block_name.find('[')); }

AssembledSdp assemble_sdp(const ValidatedProblem& problem, const BetaSelection& beta) {
    const auto& d = problem.dims();
    const int nx = d.nx, nu = d.nu, nw = d.nw, H = d.H;
    if (beta.P_beta.horizon() != H) {
        throw DimensionMismatch("beta.P_beta", std::to_string(H), std::to_string(beta.P_beta.horizon()));
    }

    AssembledSdp out;
    out.stacked = build_stacked(problem.plant(), problem.spec().disturbance, H);
    out.P_beta = beta.P_beta.with_block_dims(nu, nw);
    SdpLayout& L = out.layout;
    L.nx = nx;
    L.nu = nu;
    L.nw = nw;
    L.H = H;
    auto& vars = out.problem.variables;

    // decision variables
    AffineMatrix V = AffineMatrix::zero(H * nu, nx);
    for (int r = 0; r < H * nu; ++r) {
        for (int c = 0; c < nx; ++c) {
            const int idx = static_cast<int>(vars.size());
            vars.push_back({VarKind::V, r, c});
            L.V_index.push_back(idx);
            V.add_entry(idx, r, c);
        }
    }
    AffineMatrix M = AffineMatrix::zero(H * nu, H * nw);
    for (int k = 0; k < H; ++k) {
        for (int r = 0; r < k; ++r) {
            if (!out.P_beta.bit(k, r)) continue;
            for (int i = 0; i < nu; ++i) {
                for (int j = 0; j < nw; ++j) {
                    const int idx = static_cast<int>(vars.size());
                    const int row = k * nu + i, col = r * nw + j;
                    vars.push_back({VarKind::M, row, col});
                    L.M_index.emplace(std::pair{row, col}, idx);
                    M.add_entry(idx, row, col);
                }
            }
        }
    }
    const int ns = (H + 1) * nx;
    AffineMatrix S = AffineMatrix::zero(ns, ns);
    L.S_index.assign(static_cast<std::size_t>(ns * ns), -1);
    for (int i = 0; i < ns; ++i) {
        for (int j = i; j < ns; ++j) {
            const int idx = static_cast<int>(vars.size());
            vars.push_back({VarKind::S, i, j});
            L.S_index[static_cast<std::size_t>(i * ns + j)] = idx;
            L.S_index[static_cast<std::size_t>(j * ns + i)] = idx;
            S.add_entry(idx, i, j);
            if (i != j) S.add_entry(idx, j, i);
        }
    }
    L.tau_index = static_cast<int>(vars.size());
    vars.push_back({VarKind::Epigraph, 0, 0});

    const auto& ss = out.stacked;
    const MatrixXd& W = ss.bigW;
    const VectorXd& x0 = problem.x0();
    const AffineMatrix PM = M;  // M carries variables only on the beta support
    const AffineMatrix calA = AffineMatrix(ss.bigA) + ss.bigB * V;
    const AffineMatrix scrE = AffineMatrix(ss.bigE) + ss.bigB * PM;

    auto& blocks = out.problem.psd_blocks;
    blocks.push_back(build_covariance_lmi(scrE, W, S));
    for (int k = 0; k < H; ++k) {
        const double c_x = chi2_quantile(beta.gamma_x[static_cast<std::size_t>(k)], nx);
        const Polytope& X_next = problem.state_set(k + 1);
        const AffineMatrix A_next = calA.middle_rows((k + 1) * nx, nx);
        const AffineMatrix E_next = scrE.middle_rows((k + 1) * nx, nx);
        for (int j = 0; j < X_next.num_halfspaces(); ++j) {
            blocks.push_back(build_state_lmi(k, j, X_next, A_next, E_next, W, x0, c_x));
        }
    }
    for (int k = 0; k < H; ++k) {
        const double c_u = chi2_quantile(beta.gamma_u[static_cast<std::size_t>(k)], nu);
        const AffineMatrix V_k = V.middle_rows(k * nu, nu);
        const AffineMatrix M_k = M.middle_rows(k * nu, nu);
        for (int i = 0; i < problem.input_set().num_halfspaces(); ++i) {
            blocks.push_back(build_input_lmi(k, i, problem.input_set(), V_k, M_k, out.P_beta, W, x0, c_u));
        }
    }

    // tau >= ||Qh E[x]||^2 + ||Rh E[u]||^2  as  ||(2y, tau - 1)|| <= tau + 1
    const auto& weights = problem.spec().weights;
    const MatrixXd Qh = psd_sqrt(block_diag(weights.Q));
    const MatrixXd Rh = psd_sqrt(block_diag(weights.R));
    const MatrixXd x0m = x0;
    const AffineMatrix yx = Qh * (calA * x0m);
    const AffineMatrix yu = Rh * (V * x0m);
    const Eigen::Index ny = yx.rows() + yu.rows();
    SocBlock soc;
    soc.name = "objective";
    soc.t0 = 1.0;
    soc.t_terms.emplace_back(L.tau_index, 1.0);
    soc.y0 = VectorXd::Zero(ny + 1);
    soc.y0.head(yx.rows()) = 2.0 * yx.constant();
    soc.y0.segment(yx.rows(), yu.rows()) = 2.0 * yu.constant();
    soc.y0(ny) = -1.0;
    std::map<int, VectorXd> yterms;
    auto add_y = [&](const AffineMatrix& part, Eigen::Index offset) {
        for (const auto& [v, c] : part.coeffs()) {
            auto [it, ins] = yterms.try_emplace(v, VectorXd::Zero(ny + 1));
            it->second.segment(offset, part.rows()) += 2.0 * c.col(0);
        }
    };
    add_y(yx, 0);
    add_y(yu, yx.rows());
    VectorXd tau_dir = VectorXd::Zero(ny + 1);
    tau_dir(ny) = 1.0;
    yterms.emplace(L.tau_index, tau_dir);
    for (auto& [v, y] : yterms) {
        if (!y.isZero(0.0)) soc.y_terms.emplace_back(v, std::move(y));
    }
    out.problem.soc_blocks.push_back(std::move(soc));

    out.problem.objective = VectorXd::Zero(static_cast<Eigen::Index>(vars.size()));
    out.problem.objective(L.tau_index) = 1.0;
    for (int i = 0; i < ns; ++i) {
        out.problem.objective(L.S_index[static_cast<std::size_t>(i * ns + i)]) = weights.S;
    }
    out.problem.check();
    return out;
}

FeedbackPolicy extract_policy(const AssembledSdp& sdp, const VectorXd& z, MatrixXd* S_out) {
    const auto& L = sdp.layout;
    FeedbackPolicy policy;
    policy.V = MatrixXd::Zero(L.H * L.nu, L.nx);
    for (int r = 0; r < L.H * L.nu; ++r) {
        for (int c = 0; c < L.nx; ++c) policy.V(r, c) = z(L.V_index[static_cast<std::size_t>(r * L.nx + c)]);
    }
    policy.M = MatrixXd::Zero(L.H * L.nu, L.H * L.nw);
    for (const auto& [rc, idx] : L.M_index) policy.M(rc.first, rc.second) = z(idx);
    policy.support_mask = sdp.P_beta;
    if (S_out) {
        const int ns = (L.H + 1) * L.nx;
        S_out->resize(ns, ns);
        for (int i = 0; i < ns; ++i) {
            for (int j = 0; j < ns; ++j) (*S_out)(i, j) = z(L.S_index[static_cast<std::size_t>(i * ns + j)]);
        }
    }
    return policy;
}

SynthesisResult synthesize(const ValidatedProblem& problem, const AoiChain& chain, const SynthesisOptions& options) {
    const int H = problem.horizon();
    const AoiTable table = build_aoi_table(chain, H);
    SynthesisResult result;
    result.beta = select_beta(table, problem.delta_u(), problem.delta_x(), options.beta_rule);

    AssembledSdp sdp = assemble_sdp(problem, result.beta);
    static const InteriorPointBackend backend;
    const Solution sol = solve(sdp.problem, options.solver, backend);
    result.solver_stats = {backend.name(), sol.iterations, sol.primal_infeasibility, sol.dual_infeasibility,
                           sol.duality_gap, sol.min_block_eigenvalue};
    if (sol.status == SolveStatus::Infeasible) {
        throw SolverInfeasible(sol.violated_block, lmi_family(sol.violated_block));
    }
    if (sol.status != SolveStatus::Optimal) {
        throw SolverNumericalFailure("conic solve ended with status " + to_string(sol.status) + " after " +
                                     std::to_string(sol.iterations) + " iterations");
    }

    constexpr double kCertTol = 1e-7;
    const auto report = verify_solution(sdp.problem, sol, kCertTol);
    if (!report.passed) {
        throw SolverNumericalFailure("solution fails certification at block " + report.worst_block);
    }
    result.solver_stats.min_block_eigenvalue = report.worst_margin;

    result.policy = extract_policy(sdp, sol.values, &result.S_star);
    const ClosedLoop cl = close_loop(sdp.stacked, result.policy, sdp.P_beta);
    const MatrixXd cov = cl.scrE * sdp.stacked.bigW * cl.scrE.transpose();
    if (min_eigenvalue(result.S_star - cov) < -kCertTol) {
        throw SolverNumericalFailure("covariance bound S violated at the solution");
    }
    result.objective_value = sol.objective;
    result.sdp = std::move(sdp.problem);
    return result;
}

}  // namespace aoismpc
