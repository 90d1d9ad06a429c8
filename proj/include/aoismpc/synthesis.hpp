#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "aoismpc/affine.hpp"
#include "aoismpc/aoi.hpp"
#include "aoismpc/chi2.hpp"
#include "aoismpc/conic.hpp"
#include "aoismpc/model.hpp"
#include "aoismpc/prediction.hpp"

namespace aoismpc {

/// Input chance-constraint LMI for step k and half-space i of U:
///   [[s, sqrt(c_u) C_i (P_k o M_k) W], [*, s W]] >= 0,  s = b_i - C_i V_k x0.
/// V_k is nu x nx, M_row_k is nu x H nw; bits of P_beta outside its support drop out.
LmiBlock build_input_lmi(int k, int i, const Polytope& input_set, const AffineMatrix& V_k,
                         const AffineMatrix& M_row_k, const IndicatorMatrix& P_beta, const MatrixXd& bigW,
                         const VectorXd& x0, double c_u);

/// State chance-constraint LMI for x_{k+1} and half-space j of X_{k+1}:
///   [[s, sqrt(c_x) C_j E_{k+1} W], [*, s W]] >= 0,  s = b_j - C_j A_{k+1} x0,
/// where calA_next, scrE_next are the block rows of calA and scrE^beta for x_{k+1}.
LmiBlock build_state_lmi(int k, int j, const Polytope& state_set_next, const AffineMatrix& calA_next,
                         const AffineMatrix& scrE_next, const MatrixXd& bigW, const VectorXd& x0, double c_x);

/// [[S, scrE W], [*, W]] >= 0, i.e. S >= scrE W scrE^T when W > 0.
LmiBlock build_covariance_lmi(const AffineMatrix& scrE_beta, const MatrixXd& bigW, const AffineMatrix& S);

/// Index maps from (V, M, S) entries to decision variables.
struct SdpLayout {
    int nx = 0, nu = 0, nw = 0, H = 0;
    std::vector<int> V_index;          // row-major over the H nu x nx matrix
    std::map<std::pair<int, int>, int> M_index;  // (row, col) of the H nu x H nw matrix
    std::vector<int> S_index;          // row-major over (H+1) nx square, symmetric
    int tau_index = -1;

    int num_structural_vars() const;
};

struct AssembledSdp {
    ConicProblem problem;
    SdpLayout layout;
    IndicatorMatrix P_beta;  // with nu x nw blocks
    StackedSystem stacked;
};

/// Builds the cone program: covariance LMI, state and input chance LMIs and the
/// quadratic objective as an SOC epigraph.
AssembledSdp assemble_sdp(const ValidatedProblem& problem, const BetaSelection& beta);

struct SolverStats {
    std::string backend;
    int iterations = 0;
    double primal_infeasibility = 0.0;
    double dual_infeasibility = 0.0;
    double duality_gap = 0.0;
    double min_block_eigenvalue = 0.0;
};

struct SynthesisOptions {
    SolverSettings solver;
    BetaRule beta_rule = BetaRule::Strict;
};

struct SynthesisResult {
    FeedbackPolicy policy;
    MatrixXd S_star;
    BetaSelection beta;
    double objective_value = 0.0;
    SolverStats solver_stats;
    ConicProblem sdp;
};

/// Extracts (V, M, S) from a solution vector. Entries of M outside the beta
/// support are exactly zero.
FeedbackPolicy extract_policy(const AssembledSdp& sdp, const VectorXd& z, MatrixXd* S_out = nullptr);

/// Full pipeline: AoI table, beta selection, SDP, solve, certification.
/// Throws InfeasibleRiskChain, SolverInfeasible or SolverNumericalFailure.
SynthesisResult synthesize(const ValidatedProblem& problem, const AoiChain& chain,
                           const SynthesisOptions& options = {});

/// Family prefix of a block name ("Lu[k=1,i=0]" -> "Lu").
std::string lmi_family(const std::string& block_name);

}  // namespace aoismpc
