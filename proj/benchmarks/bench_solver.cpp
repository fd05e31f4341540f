#include "rcmdp/critic.hpp"
#include "rcmdp/instances.hpp"
#include "rcmdp/oracle.hpp"

#include <benchmark/benchmark.h>

namespace {

void CriticSweep(benchmark::State& state) {
    rcmdp::GarnetParams params;
    params.n_states = static_cast<int>(state.range(0));
    params.n_actions = 2;
    params.branching = params.n_states;
    const auto mdp = rcmdp::make_garnet(params, 21);
    const auto policy = rcmdp::PolicyTable::uniform(params.n_states, 2);
    const rcmdp::UncertaintyModel model = rcmdp::Contamination{0.1};

    rcmdp::CriticConfig cfg;
    cfg.t_value_iters = 200;
    cfg.t_gain_iters = 50;
    rcmdp::GenerativeModel gm(mdp, 7);
    for (auto _ : state) {
        rcmdp::GenerativeModel run_gm = gm.split(static_cast<std::uint64_t>(state.iterations()));
        benchmark::DoNotOptimize(
            rcmdp::td_evaluate(run_gm, policy, mdp.signal(0), model, cfg).g);
    }
}
BENCHMARK(CriticSweep)->Arg(3)->Arg(8)->Arg(16);

void OracleRobustEvaluate(benchmark::State& state) {
    rcmdp::GarnetParams params;
    params.n_states = static_cast<int>(state.range(0));
    params.n_actions = 2;
    params.branching = params.n_states;
    const auto mdp = rcmdp::make_garnet(params, 33);
    const auto policy = rcmdp::PolicyTable::uniform(params.n_states, 2);
    const rcmdp::UncertaintyModel model = rcmdp::TotalVariation{0.1};
    for (auto _ : state)
        benchmark::DoNotOptimize(
            rcmdp::robust_evaluate(mdp, policy, mdp.signal(0), model).g);
}
BENCHMARK(OracleRobustEvaluate)->Arg(3)->Arg(8)->Arg(16);

} // namespace
