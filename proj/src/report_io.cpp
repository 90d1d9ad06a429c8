#include "aoismpc/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "aoismpc/config.hpp"
#include "aoismpc/errors.hpp"

namespace aoismpc {
namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

ordered matrix_json(const MatrixXd& m) {
    ordered rows = ordered::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered row = ordered::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered vector_json(const VectorXd& v) {
    ordered out = ordered::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

// NaN is not representable in JSON
ordered number_or_null(double v) { return std::isnan(v) ? ordered(nullptr) : ordered(v); }

MatrixXd matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols) {
    MatrixXd m(rows, cols);
    if (static_cast<Eigen::Index>(j.size()) != rows) throw ConfigError("policy: matrix row count mismatch");
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError("policy: matrix column count mismatch");
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

ordered indicator_json(const IndicatorMatrix& P) {
    ordered rows = ordered::array();
    for (int k = 0; k < P.horizon(); ++k) {
        ordered row = ordered::array();
        for (int r = 0; r < k; ++r) row.push_back(P.bit(k, r) ? 1 : 0);
        rows.push_back(std::move(row));
    }
    return {{"H", P.horizon()}, {"nu", P.nu()}, {"nw", P.nw()}, {"rows", std::move(rows)}};
}

IndicatorMatrix indicator_from(const json& j) {
    IndicatorMatrix P(j.at("H").get<int>(), j.at("nu").get<int>(), j.at("nw").get<int>());
    const auto& rows = j.at("rows");
    if (static_cast<int>(rows.size()) != P.horizon()) throw ConfigError("policy: indicator row count mismatch");
    for (int k = 0; k < P.horizon(); ++k) {
        const auto& row = rows.at(static_cast<std::size_t>(k));
        if (static_cast<int>(row.size()) != k) throw ConfigError("policy: indicator row length mismatch");
        for (int r = 0; r < k; ++r) P.set(k, r, row.at(static_cast<std::size_t>(r)).get<int>() != 0);
    }
    return P;
}

template <class T>
std::vector<T> list_from(const json& j) {
    return j.get<std::vector<T>>();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

PolicyFile make_policy_file(const SynthesisResult& result, std::uint64_t config_hash, std::uint64_t seed) {
    return {result.policy, result.S_star, result.beta, result.objective_value, result.solver_stats, config_hash, seed};
}

SynthesisResult to_synthesis_result(const PolicyFile& file) {
    SynthesisResult r;
    r.policy = file.policy;
    r.S_star = file.S;
    r.beta = file.beta;
    r.objective_value = file.objective;
    r.solver_stats = file.solver_stats;
    return r;
}

void write_policy(std::ostream& out, const PolicyFile& f) {
    const auto& b = f.beta;
    ordered j;
    j["format"] = "aoismpc-policy";
    j["version"] = 1;
    j["config_hash"] = hex64(f.config_hash);
    j["seed"] = f.seed;
    j["V"] = matrix_json(f.policy.V);
    j["M"] = matrix_json(f.policy.M);
    j["support_mask"] = indicator_json(f.policy.support_mask);
    j["S"] = matrix_json(f.S);
    j["beta"] = {{"P_beta", indicator_json(b.P_beta)},
                 {"alpha", b.alpha},
                 {"alpha_products", b.alpha_products},
                 {"gamma_u", b.gamma_u},
                 {"gamma_x", b.gamma_x},
                 {"delta_u", b.delta_u},
                 {"delta_x", b.delta_x}};
    j["objective"] = f.objective;
    const auto& s = f.solver_stats;
    j["solver"] = {{"backend", s.backend},
                   {"iterations", s.iterations},
                   {"primal_infeasibility", s.primal_infeasibility},
                   {"dual_infeasibility", s.dual_infeasibility},
                   {"duality_gap", s.duality_gap},
                   {"min_block_eigenvalue", s.min_block_eigenvalue}};
    out << j.dump(2) << '\n';
}

PolicyFile read_policy(std::istream& in) {
    PolicyFile f;
    try {
        const json j = json::parse(in);
        if (j.at("format").get<std::string>() != "aoismpc-policy") throw ConfigError("policy: unknown format");
        f.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
        f.seed = j.at("seed").get<std::uint64_t>();
        f.policy.support_mask = indicator_from(j.at("support_mask"));
        const auto& mask = f.policy.support_mask;
        const Eigen::Index rows = mask.horizon() * mask.nu();
        const auto nx = static_cast<Eigen::Index>(j.at("V").at(0).size());
        f.policy.V = matrix_from(j.at("V"), rows, nx);
        f.policy.M = matrix_from(j.at("M"), rows, mask.horizon() * mask.nw());
        const auto ns = static_cast<Eigen::Index>(j.at("S").size());
        f.S = matrix_from(j.at("S"), ns, ns);
        const auto& b = j.at("beta");
        f.beta.P_beta = indicator_from(b.at("P_beta"));
        f.beta.alpha = list_from<double>(b.at("alpha"));
        f.beta.alpha_products = list_from<double>(b.at("alpha_products"));
        f.beta.gamma_u = list_from<double>(b.at("gamma_u"));
        f.beta.gamma_x = list_from<double>(b.at("gamma_x"));
        f.beta.delta_u = b.at("delta_u").get<double>();
        f.beta.delta_x = b.at("delta_x").get<double>();
        f.objective = j.at("objective").get<double>();
        const auto& s = j.at("solver");
        f.solver_stats = {s.at("backend").get<std::string>(),        s.at("iterations").get<int>(),
                          s.at("primal_infeasibility").get<double>(), s.at("dual_infeasibility").get<double>(),
                          s.at("duality_gap").get<double>(),          s.at("min_block_eigenvalue").get<double>()};
    } catch (const json::exception& e) {
        throw ConfigError(std::string("policy: ") + e.what());
    } catch (const std::logic_error& e) {
        throw ConfigError(std::string("policy: ") + e.what());
    }
    if (!f.policy.respects_mask()) throw ConfigError("policy: M has entries outside its support mask");
    return f;
}

void write_report(std::ostream& out, const SimulationReport& rep, std::uint64_t config_hash) {
    ordered j;
    j["format"] = "aoismpc-report";
    j["config_hash"] = hex64(config_hash);
    j["seed"] = rep.seed;
    j["n_runs"] = rep.n_runs;
    j["H"] = rep.H;
    j["delta_x"] = rep.delta_x;
    j["delta_u"] = rep.delta_u;
    j["counts"] = {{"state_ok", rep.state_ok},
                   {"input_ok", rep.input_ok},
                   {"beta_applicable", rep.beta_applicable},
                   {"beta_through", rep.beta_through},
                   {"state_ok_given_beta", rep.state_ok_given_beta},
                   {"input_ok_given_beta", rep.input_ok_given_beta}};
    j["targets"] = {{"gamma_x", rep.gamma_x}, {"gamma_u", rep.gamma_u}, {"alpha_products", rep.alpha_products}};
    ordered rates = ordered::array();
    for (const auto& r : empirical_rates(rep)) {
        rates.push_back({{"k", r.k},
                         {"state", number_or_null(r.state)},
                         {"state_se", number_or_null(r.state_se)},
                         {"input", number_or_null(r.input)},
                         {"input_se", number_or_null(r.input_se)},
                         {"beta", number_or_null(r.beta)},
                         {"beta_se", number_or_null(r.beta_se)},
                         {"state_given_beta", number_or_null(r.state_given_beta)},
                         {"state_given_beta_se", number_or_null(r.state_given_beta_se)},
                         {"input_given_beta", number_or_null(r.input_given_beta)},
                         {"input_given_beta_se", number_or_null(r.input_given_beta_se)}});
    }
    j["rates"] = std::move(rates);
    j["mean"] = vector_json(rep.mean);
    j["covariance"] = matrix_json(rep.covariance);
    j["mean_cost"] = rep.mean_cost;
    out << j.dump(2) << '\n';
}

void write_trajectories(std::ostream& out, const std::vector<RunRecord>& records) {
    if (records.empty()) return;
    const auto nx = records.front().x.front().size();
    const auto nu = records.front().u.empty() ? Eigen::Index{0} : records.front().u.front().size();
    out << "run,k";
    for (Eigen::Index i = 0; i < nx; ++i) out << ",x_" << i;
    for (Eigen::Index i = 0; i < nu; ++i) out << ",u_" << i;
    out << ",aoi,beta_applicable,state_ok,input_ok\n";
    std::string line;
    for (std::size_t run = 0; run < records.size(); ++run) {
        const RunRecord& rec = records[run];
        const std::size_t H = rec.u.size();
        for (std::size_t k = 0; k <= H; ++k) {
            line = std::to_string(run) + "," + std::to_string(k);
            for (Eigen::Index i = 0; i < nx; ++i) line += "," + fmt(rec.x[k](i));
            for (Eigen::Index i = 0; i < nu; ++i) line += "," + (k < H ? fmt(rec.u[k](i)) : std::string());
            if (k < H) {
                line += "," + std::to_string(rec.trace.aoi[k]) + "," + (rec.beta_applicable[k] ? "1" : "0") + "," +
                        (rec.state_ok[k] ? "1" : "0") + "," + (rec.input_ok[k] ? "1" : "0");
            } else {
                line += ",,," + std::string(rec.state_ok[k] ? "1" : "0") + ",";
            }
            out << line << '\n';
        }
    }
}

void write_aoi_distribution(std::ostream& out, const AoiTable& table) {
    out << "k,a,mu\n";
    for (int k = 0; k < table.H; ++k) {
        const VectorXd& mu = table.mu[static_cast<std::size_t>(k)];
        for (Eigen::Index a = 0; a < mu.size(); ++a) out << k << ',' << a << ',' << fmt(mu(a)) << '\n';
    }
}

void write_availability(std::ostream& out, const AoiTable& table) {
    out << "k,r,p\n";
    for (int k = 0; k < table.H; ++k) {
        for (int r = 0; r < k; ++r) out << k << ',' << r << ',' << fmt(table.p(k, r)) << '\n';
    }
}

void write_enumeration(std::ostream& out, const std::set<IndicatorMatrix>& realizations, int H,
                       std::uint64_t config_hash) {
    ordered list = ordered::array();
    for (const auto& P : realizations) list.push_back(realization_tag(P));
    const std::uint64_t bound = catalan(H);
    ordered j = {{"format", "aoismpc-enumeration"},
                 {"config_hash", hex64(config_hash)},
                 {"H", H},
                 {"count", realizations.size()},
                 {"catalan_bound", bound},
                 {"within_bound", realizations.size() <= bound},
                 {"realizations", std::move(list)}};
    out << j.dump(2) << '\n';
}

}  // namespace aoismpc
