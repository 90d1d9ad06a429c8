#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "aoismpc/aoi.hpp"
#include "aoismpc/sim.hpp"
#include "aoismpc/synthesis.hpp"

namespace aoismpc {

/// Contents of policy.json.
struct PolicyFile {
    FeedbackPolicy policy;
    MatrixXd S;
    BetaSelection beta;
    double objective = 0.0;
    SolverStats solver_stats;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
};

PolicyFile make_policy_file(const SynthesisResult& result, std::uint64_t config_hash, std::uint64_t seed);
/// Rebuilds the parts of a SynthesisResult the simulator needs.
SynthesisResult to_synthesis_result(const PolicyFile& file);

void write_policy(std::ostream& out, const PolicyFile& file);
/// Throws ConfigError on malformed input.
PolicyFile read_policy(std::istream& in);

void write_report(std::ostream& out, const SimulationReport& report, std::uint64_t config_hash);

/// Header run,k,x_0..,u_0..,aoi,beta_applicable,state_ok,input_ok; one row per
/// (run, k) for k = 0..H. Input columns are empty at k = H.
void write_trajectories(std::ostream& out, const std::vector<RunRecord>& records);

/// mu_k[a] as k,a,mu and p_{k,r} as k,r,p.
void write_aoi_distribution(std::ostream& out, const AoiTable& table);
void write_availability(std::ostream& out, const AoiTable& table);

/// Realization listing with cardinality and the Catalan bound.
void write_enumeration(std::ostream& out, const std::set<IndicatorMatrix>& realizations, int H,
                       std::uint64_t config_hash);

}  // namespace aoismpc
