#include <benchmark/benchmark.h>

#include "aoismpc/sim.hpp"
#include "aoismpc/synthesis.hpp"
#include "scenario.hpp"

using namespace aoismpc;

namespace {

struct Fixture {
    ValidatedProblem problem = validate(testing::double_integrator());
    AoiChain chain = testing::desk_channel();
    SynthesisResult result = synthesize(problem, chain, {SolverSettings{}, BetaRule::Adaptive});
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

void BM_Serial(benchmark::State& state) {
    const auto& f = fixture();
    SimulationOptions opt;
    opt.n_runs = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_closed_loop_serial(f.result, f.problem, f.chain, opt).report.mean_cost);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_OpenMP(benchmark::State& state) {
    const auto& f = fixture();
    SimulationOptions opt;
    opt.n_runs = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_closed_loop(f.result, f.problem, f.chain, opt).report.mean_cost);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_Serial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OpenMP)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
