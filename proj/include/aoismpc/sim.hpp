#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aoismpc/aoi.hpp"
#include "aoismpc/model.hpp"
#include "aoismpc/prediction.hpp"
#include "aoismpc/synthesis.hpp"

namespace aoismpc {

struct ChannelTrace {
    std::vector<int> aoi;       // a_0..a_{H-1}
    IndicatorMatrix realized;   // 1_{k,r} = [r < k - a_k]
    std::vector<int> available; // l_k = k - a_k

    static ChannelTrace from_path(const std::vector<int>& aoi);
};

struct RunRecord {
    std::vector<VectorXd> x;  // x_0..x_H
    std::vector<VectorXd> u;  // u_0..u_{H-1}
    std::vector<VectorXd> w;  // true disturbances w_0..w_{H-1}
    std::vector<VectorXd> w_hat;  // reconstructed, same length
    ChannelTrace trace;
    std::vector<bool> beta_applicable;  // per step
    std::vector<bool> state_ok;         // x_0..x_H
    std::vector<bool> input_ok;         // u_0..u_{H-1}
    double cost = 0.0;
};

/// w = pinv(E) (x_next - A x - B u). Throws ReconstructionResidual when the
/// increment is not in range(E).
VectorXd reconstruct_disturbance(const LinearPlant& plant, const VectorXd& x, const VectorXd& u,
                                 const VectorXd& x_next);

/// Throws RankDeficientE unless E has full column rank.
void check_reconstructible(const LinearPlant& plant);

struct ControlOutput {
    VectorXd u;
    bool beta_applicable = false;
};

/// u_k = V_k x0 + sum_{r < l_k, beta bit set} M_{k,r} w_r. The flag is set when
/// every beta-required disturbance of row k is available.
ControlOutput control_step(const FeedbackPolicy& policy, int k, const VectorXd& x0,
                           std::span<const VectorXd> w_hat, const ChannelTrace& trace);

struct SimulationReport {
    int n_runs = 0;
    int H = 0;
    std::uint64_t seed = 0;
    std::vector<long> state_ok;             // per k = 0..H
    std::vector<long> input_ok;             // per k = 0..H-1
    std::vector<long> beta_applicable;      // per k, at step k
    std::vector<long> beta_through;         // per k, at every step 0..k
    std::vector<long> state_ok_given_beta;  // x_{k+1} ok and beta through k, per k = 0..H-1
    std::vector<long> input_ok_given_beta;  // u_k ok and beta at k
    std::vector<double> gamma_x, gamma_u, alpha_products;
    double delta_x = 0.0, delta_u = 0.0;
    VectorXd mean;      // stacked x, (H+1) nx
    MatrixXd covariance;
    double mean_cost = 0.0;
};

struct SimulationOptions {
    int n_runs = 1000;
    std::uint64_t seed = 1;
    /// Keep every RunRecord in the output (memory grows with n_runs).
    bool keep_records = false;
};

struct SimulationOutput {
    SimulationReport report;
    std::vector<RunRecord> records;
};

/// Single run with its own channel and disturbance substreams.
RunRecord simulate_run(const SynthesisResult& result, const ValidatedProblem& problem, const AoiChain& chain,
                       std::uint64_t seed, std::uint64_t run);

/// Parallel over runs (OpenMP, capped by AOISMPC_THREADS). The report does not
/// depend on the thread count.
SimulationOutput run_closed_loop(const SynthesisResult& result, const ValidatedProblem& problem,
                                 const AoiChain& chain, const SimulationOptions& options);

/// Serial reference implementation of run_closed_loop.
SimulationOutput run_closed_loop_serial(const SynthesisResult& result, const ValidatedProblem& problem,
                                        const AoiChain& chain, const SimulationOptions& options);

struct RateRow {
    int k = 0;
    double state = 0.0, state_se = 0.0;  // P(x_k in X_k)
    double input = 0.0, input_se = 0.0;  // P(u_k in U), NaN at k = H
    double beta = 0.0, beta_se = 0.0;    // P(beta applicable at k), NaN at k = H
    double state_given_beta = 0.0, state_given_beta_se = 0.0;  // x_k given beta through k-1, NaN at k = 0
    double input_given_beta = 0.0, input_given_beta_se = 0.0;
};

std::vector<RateRow> empirical_rates(const SimulationReport& report);

/// Binomial standard error sqrt(p (1 - p) / n); zero for n = 0.
double binomial_se(double p, long n);

}  // namespace aoismpc
