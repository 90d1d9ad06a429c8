#include "aoismpc/sim.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>

#include <omp.h>

#include "aoismpc/errors.hpp"

namespace aoismpc {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t substream(std::uint64_t seed, std::uint64_t run, std::uint64_t stream) {
    return splitmix64(splitmix64(splitmix64(seed) ^ run) ^ stream);
}

MatrixXd covariance_factor(const MatrixXd& W) {
    Eigen::LLT<MatrixXd> llt(W);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (W + W.transpose()));
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

// Everything a run contributes to the report.
struct RunSummary {
    VectorXd stacked_x;
    std::vector<bool> beta_applicable, state_ok, input_ok;
    double cost = 0.0;
};

RunSummary summarize(const RunRecord& rec) {
    RunSummary s;
    const int H = static_cast<int>(rec.u.size());
    const int nx = static_cast<int>(rec.x[0].size());
    s.stacked_x.resize((H + 1) * nx);
    for (int k = 0; k <= H; ++k) s.stacked_x.segment(k * nx, nx) = rec.x[static_cast<std::size_t>(k)];
    s.beta_applicable = rec.beta_applicable;
    s.state_ok = rec.state_ok;
    s.input_ok = rec.input_ok;
    s.cost = rec.cost;
    return s;
}

SimulationReport aggregate(const std::vector<RunSummary>& runs, const SynthesisResult& result, int H,
                           std::uint64_t seed) {
    SimulationReport rep;
    rep.n_runs = static_cast<int>(runs.size());
    rep.H = H;
    rep.seed = seed;
    rep.state_ok.assign(static_cast<std::size_t>(H + 1), 0);
    rep.input_ok.assign(static_cast<std::size_t>(H), 0);
    rep.beta_applicable.assign(static_cast<std::size_t>(H), 0);
    rep.beta_through.assign(static_cast<std::size_t>(H), 0);
    rep.state_ok_given_beta.assign(static_cast<std::size_t>(H), 0);
    rep.input_ok_given_beta.assign(static_cast<std::size_t>(H), 0);
    rep.gamma_x = result.beta.gamma_x;
    rep.gamma_u = result.beta.gamma_u;
    rep.alpha_products = result.beta.alpha_products;
    rep.delta_x = result.beta.delta_x;
    rep.delta_u = result.beta.delta_u;
    if (runs.empty()) return rep;

    const Eigen::Index n = runs.front().stacked_x.size();
    rep.mean = VectorXd::Zero(n);
    MatrixXd second = MatrixXd::Zero(n, n);
    double cost = 0.0;
    for (const auto& r : runs) {
        rep.mean += r.stacked_x;
        second.selfadjointView<Eigen::Lower>().rankUpdate(r.stacked_x);
        cost += r.cost;
        for (int k = 0; k <= H; ++k) rep.state_ok[static_cast<std::size_t>(k)] += r.state_ok[static_cast<std::size_t>(k)];
        bool through = true;
        for (int k = 0; k < H; ++k) {
            const auto i = static_cast<std::size_t>(k);
            through = through && r.beta_applicable[i];
            rep.input_ok[i] += r.input_ok[i];
            rep.beta_applicable[i] += r.beta_applicable[i];
            rep.beta_through[i] += through;
            rep.state_ok_given_beta[i] += through && r.state_ok[i + 1];
            rep.input_ok_given_beta[i] += r.beta_applicable[i] && r.input_ok[i];
        }
    }
    const double N = static_cast<double>(runs.size());
    rep.mean /= N;
    second = second.selfadjointView<Eigen::Lower>();
    rep.covariance = second / N - rep.mean * rep.mean.transpose();
    rep.mean_cost = cost / N;
    return rep;
}

int thread_cap() {
    if (const char* env = std::getenv("AOISMPC_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return omp_get_max_threads();
}

void check_run_count(const SimulationOptions& options) {
    if (options.n_runs < 0) throw ConfigError("n_runs must be nonnegative");
}

}  // namespace

ChannelTrace ChannelTrace::from_path(const std::vector<int>& aoi) {
    ChannelTrace t;
    t.aoi = aoi;
    t.realized = IndicatorMatrix::from_aoi_path(aoi);
    t.available.resize(aoi.size());
    for (std::size_t k = 0; k < aoi.size(); ++k) t.available[k] = static_cast<int>(k) - aoi[k];
    return t;
}

void check_reconstructible(const LinearPlant& plant) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(plant.E);
    if (qr.rank() < plant.E.cols()) {
        throw RankDeficientE("E has rank " + std::to_string(qr.rank()) + " < n_w = " +
                             std::to_string(plant.E.cols()) + "; disturbances cannot be reconstructed");
    }
}

VectorXd reconstruct_disturbance(const LinearPlant& plant, const VectorXd& x, const VectorXd& u,
                                 const VectorXd& x_next) {
    const VectorXd increment = x_next - plant.A * x - plant.B * u;
    const VectorXd w = plant.E.completeOrthogonalDecomposition().solve(increment);
    const double residual = (plant.E * w - increment).norm();
    if (residual > 1e-8 * (1.0 + x_next.norm())) {
        throw ReconstructionResidual("disturbance reconstruction residual " + std::to_string(residual) +
                                     " exceeds tolerance");
    }
    return w;
}

ControlOutput control_step(const FeedbackPolicy& policy, int k, const VectorXd& x0,
                           std::span<const VectorXd> w_hat, const ChannelTrace& trace) {
    const IndicatorMatrix& beta = policy.support_mask;
    const int l_k = trace.available.at(static_cast<std::size_t>(k));
    ControlOutput out;
    out.u = policy.V_row(k) * x0;
    out.beta_applicable = true;
    for (int r = 0; r < k; ++r) {
        if (!beta.bit(k, r)) continue;
        if (r >= l_k) {
            out.beta_applicable = false;
            continue;
        }
        out.u += policy.block(k, r) * w_hat[static_cast<std::size_t>(r)];
    }
    return out;
}

RunRecord simulate_run(const SynthesisResult& result, const ValidatedProblem& problem, const AoiChain& chain,
                       std::uint64_t seed, std::uint64_t run) {
    const auto& plant = problem.plant();
    const auto& d = problem.dims();
    const int H = d.H;
    const auto& weights = problem.spec().weights;

    std::mt19937_64 channel_rng(substream(seed, run, 0));
    std::mt19937_64 noise_rng(substream(seed, run, 1));
    std::normal_distribution<double> normal(0.0, 1.0);

    RunRecord rec;
    rec.trace = ChannelTrace::from_path(sample_aoi_path(chain, H, channel_rng).path);
    rec.w.resize(static_cast<std::size_t>(H));
    for (int k = 0; k < H; ++k) {
        VectorXd z(d.nw);
        for (int i = 0; i < d.nw; ++i) z(i) = normal(noise_rng);
        rec.w[static_cast<std::size_t>(k)] = covariance_factor(problem.spec().disturbance.covariances[static_cast<std::size_t>(k)]) * z;
    }

    rec.x.push_back(problem.x0());
    rec.state_ok.push_back(problem.state_set(0).contains(problem.x0()));
    rec.cost = problem.x0().dot(weights.Q[0] * problem.x0());
    for (int k = 0; k < H; ++k) {
        const auto i = static_cast<std::size_t>(k);
        const ControlOutput c = control_step(result.policy, k, problem.x0(), rec.w_hat, rec.trace);
        const VectorXd x_next = plant.A * rec.x[i] + plant.B * c.u + plant.E * rec.w[i];
        rec.w_hat.push_back(reconstruct_disturbance(plant, rec.x[i], c.u, x_next));
        rec.u.push_back(c.u);
        rec.beta_applicable.push_back(c.beta_applicable);
        rec.input_ok.push_back(problem.input_set().contains(c.u));
        rec.x.push_back(x_next);
        rec.state_ok.push_back(problem.state_set(k + 1).contains(x_next));
        rec.cost += c.u.dot(weights.R[i] * c.u) + x_next.dot(weights.Q[i + 1] * x_next);
    }
    return rec;
}

SimulationOutput run_closed_loop(const SynthesisResult& result, const ValidatedProblem& problem,
                                 const AoiChain& chain, const SimulationOptions& options) {
    check_run_count(options);
    check_reconstructible(problem.plant());
    const int n = options.n_runs;
    std::vector<RunSummary> summaries(static_cast<std::size_t>(n));
    SimulationOutput out;
    if (options.keep_records) out.records.resize(static_cast<std::size_t>(n));

#pragma omp parallel for schedule(static) num_threads(thread_cap())
    for (int run = 0; run < n; ++run) {
        RunRecord rec = simulate_run(result, problem, chain, options.seed, static_cast<std::uint64_t>(run));
        summaries[static_cast<std::size_t>(run)] = summarize(rec);
        if (options.keep_records) out.records[static_cast<std::size_t>(run)] = std::move(rec);
    }
    out.report = aggregate(summaries, result, problem.horizon(), options.seed);
    return out;
}

SimulationOutput run_closed_loop_serial(const SynthesisResult& result, const ValidatedProblem& problem,
                                        const AoiChain& chain, const SimulationOptions& options) {
    check_run_count(options);
    check_reconstructible(problem.plant());
    std::vector<RunSummary> summaries;
    summaries.reserve(static_cast<std::size_t>(options.n_runs));
    SimulationOutput out;
    for (int run = 0; run < options.n_runs; ++run) {
        RunRecord rec = simulate_run(result, problem, chain, options.seed, static_cast<std::uint64_t>(run));
        summaries.push_back(summarize(rec));
        if (options.keep_records) out.records.push_back(std::move(rec));
    }
    out.report = aggregate(summaries, result, problem.horizon(), options.seed);
    return out;
}

double binomial_se(double p, long n) {
    if (n <= 0) return 0.0;
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

std::vector<RateRow> empirical_rates(const SimulationReport& report) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    const long N = report.n_runs;
    auto rate = [](long hits, long n) { return n > 0 ? static_cast<double>(hits) / static_cast<double>(n) : nan; };
    std::vector<RateRow> rows;
    for (int k = 0; k <= report.H; ++k) {
        const auto i = static_cast<std::size_t>(k);
        RateRow row;
        row.k = k;
        row.state = rate(report.state_ok[i], N);
        row.state_se = binomial_se(row.state, N);
        if (k < report.H) {
            row.input = rate(report.input_ok[i], N);
            row.input_se = binomial_se(row.input, N);
            row.beta = rate(report.beta_applicable[i], N);
            row.beta_se = binomial_se(row.beta, N);
            row.input_given_beta = rate(report.input_ok_given_beta[i], report.beta_applicable[i]);
            row.input_given_beta_se = binomial_se(row.input_given_beta, report.beta_applicable[i]);
        } else {
            row.input = row.input_se = row.beta = row.beta_se = nan;
            row.input_given_beta = row.input_given_beta_se = nan;
        }
        if (k > 0) {
            const long cond = report.beta_through[i - 1];
            row.state_given_beta = rate(report.state_ok_given_beta[i - 1], cond);
            row.state_given_beta_se = binomial_se(row.state_given_beta, cond);
        } else {
            row.state_given_beta = row.state_given_beta_se = nan;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace aoismpc
