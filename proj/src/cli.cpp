#include "aoismpc/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "aoismpc/config.hpp"
#include "aoismpc/errors.hpp"
#include "aoismpc/report_io.hpp"
#include "aoismpc/sim.hpp"
#include "aoismpc/synthesis.hpp"

namespace aoismpc {
namespace {

namespace fs = std::filesystem;

struct Args {
    std::string config;
    std::string out_dir = ".";
    std::string policy;
    std::string dump_sdp;
    std::uint64_t seed = 1;
    int runs = 1000;
    std::optional<double> tol;
    std::optional<int> horizon;
};

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    return f;
}

RunConfig load(const Args& a, bool require_problem) {
    RunConfig cfg = load_config(a.config, require_problem);
    if (a.horizon) {
        if (*a.horizon < 1) throw ConfigError("--horizon must be at least 1");
        cfg.horizon = *a.horizon;
        if (cfg.spec) cfg.spec->horizon = *a.horizon;
    }
    if (a.tol) {
        if (!(*a.tol > 0.0)) throw ConfigError("--tol must be positive");
        cfg.options.solver.tol = *a.tol;
    }
    return cfg;
}

int cmd_synth(const Args& a, std::ostream& out) {
    const RunConfig cfg = load(a, true);
    const ValidatedProblem problem = validate(*cfg.spec);
    if (!a.dump_sdp.empty()) {
        const auto beta = select_beta(build_aoi_table(*cfg.chain, problem.horizon()), problem.delta_u(),
                                      problem.delta_x(), cfg.options.beta_rule);
        auto f = open_out(a.dump_sdp);
        dump_problem(assemble_sdp(problem, beta).problem, f);
    }
    const SynthesisResult result = synthesize(problem, *cfg.chain, cfg.options);
    auto f = open_out(fs::path(a.out_dir) / "policy.json");
    write_policy(f, make_policy_file(result, cfg.config_hash, a.seed));
    out << "synth: optimal, objective " << result.objective_value << ", " << result.solver_stats.iterations
        << " iterations, beta support " << result.beta.P_beta.support_size() << "\n";
    return kExitOk;
}

int cmd_simulate(const Args& a, std::ostream& out) {
    const RunConfig cfg = load(a, true);
    const ValidatedProblem problem = validate(*cfg.spec);
    const fs::path policy_path = a.policy.empty() ? fs::path(a.out_dir) / "policy.json" : fs::path(a.policy);
    std::ifstream in(policy_path);
    if (!in) throw ConfigError("missing policy file '" + policy_path.string() + "'; run synth first");
    const PolicyFile pf = read_policy(in);
    if (pf.policy.support_mask.horizon() != problem.horizon() || pf.policy.V.cols() != problem.dims().nx) {
        throw ConfigError("policy file does not match the configured problem dimensions");
    }
    if (a.runs < 1) throw ConfigError("--runs must be at least 1");

    SimulationOptions opt;
    opt.n_runs = a.runs;
    opt.seed = a.seed;
    opt.keep_records = true;
    const SimulationOutput sim = run_closed_loop(to_synthesis_result(pf), problem, *cfg.chain, opt);

    const fs::path dir(a.out_dir);
    {
        auto f = open_out(dir / "report.json");
        write_report(f, sim.report, cfg.config_hash);
    }
    {
        auto f = open_out(dir / "trajectories.csv");
        write_trajectories(f, sim.records);
    }
    {
        auto f = open_out(dir / "rates.csv");
        f << "k,state,state_se,input,input_se,beta,beta_se,state_given_beta,state_given_beta_se,"
             "input_given_beta,input_given_beta_se\n";
        for (const auto& r : empirical_rates(sim.report)) {
            f << r.k << ',' << r.state << ',' << r.state_se << ',' << r.input << ',' << r.input_se << ',' << r.beta
              << ',' << r.beta_se << ',' << r.state_given_beta << ',' << r.state_given_beta_se << ','
              << r.input_given_beta << ',' << r.input_given_beta_se << '\n';
        }
    }
    out << "simulate: " << a.runs << " runs, seed " << a.seed << "\n";
    return kExitOk;
}

int cmd_aoi_table(const Args& a, std::ostream& out) {
    const RunConfig cfg = load(a, false);
    const AoiTable table = build_aoi_table(*cfg.chain, cfg.horizon);
    const fs::path dir(a.out_dir);
    {
        auto f = open_out(dir / "aoi_distribution.csv");
        write_aoi_distribution(f, table);
    }
    {
        auto f = open_out(dir / "availability.csv");
        write_availability(f, table);
    }
    out << "aoi-table: H=" << cfg.horizon << ", a_max=" << cfg.chain->a_max() << "\n";
    return kExitOk;
}

int cmd_enumerate(const Args& a, std::ostream& out) {
    const RunConfig cfg = load(a, false);
    const auto realizations = enumerate_realizations(*cfg.chain, cfg.horizon);
    const std::uint64_t bound = catalan(cfg.horizon);
    {
        auto f = open_out(fs::path(a.out_dir) / "enumeration.json");
        write_enumeration(f, realizations, cfg.horizon, cfg.config_hash);
    }
    out << "enumerate: H=" << cfg.horizon << ", " << realizations.size() << " realizations, Catalan bound "
        << bound << "\n";
    if (realizations.size() > bound) {
        throw std::logic_error("realization count exceeds the Catalan bound");
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Chance-constrained MPC over lossy links with age-of-information statistics"};
    app.require_subcommand(1);
    Args a;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", a.config, "Problem configuration (JSON)")->required();
        sub->add_option("--out", a.out_dir, "Output directory");
        sub->add_option("--horizon", a.horizon, "Override the configured horizon");
    };
    auto* synth = app.add_subcommand("synth", "Synthesize the feedback policy");
    common(synth);
    synth->add_option("--dump-sdp", a.dump_sdp, "Write the assembled cone program to this path");
    synth->add_option("--tol", a.tol, "Solver tolerance");
    synth->add_option("--seed", a.seed, "Seed recorded in the artifacts");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo evaluation of a synthesized policy");
    common(simulate);
    simulate->add_option("--policy", a.policy, "Policy file (default <out>/policy.json)");
    simulate->add_option("--seed", a.seed, "Master seed");
    simulate->add_option("--runs", a.runs, "Number of runs");
    auto* aoi = app.add_subcommand("aoi-table", "AoI distributions and availability probabilities");
    common(aoi);
    auto* enumerate = app.add_subcommand("enumerate", "List all reachable indicator matrices");
    common(enumerate);

    std::vector<std::string> argv_store{"aoismpc"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (synth->parsed()) return cmd_synth(a, out);
        if (simulate->parsed()) return cmd_simulate(a, out);
        if (aoi->parsed()) return cmd_aoi_table(a, out);
        return cmd_enumerate(a, out);
    } catch (const SolverInfeasible& e) {
        err << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const InfeasibleRiskChain& e) {
        err << "error: " << e.what() << " (failing k=" << e.step() << ")\n";
        return kExitRiskChain;
    } catch (const SolverNumericalFailure& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace aoismpc
