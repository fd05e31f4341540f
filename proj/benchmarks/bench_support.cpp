#include "rcmdp/sampling.hpp"
#include "rcmdp/uncertainty.hpp"
#include "rcmdp/instances.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

rcmdp::numvec random_simplex(std::mt19937_64& rng, int n) {
    rcmdp::numvec v(n);
    double sum = 0.0;
    for (double& x : v) {
        x = -std::log(std::max(std::ldexp(static_cast<double>(rng() >> 11), -53), 1e-300));
        sum += x;
    }
    for (double& x : v) x /= sum;
    return v;
}

rcmdp::numvec random_values(std::mt19937_64& rng, int n) {
    rcmdp::numvec v(n);
    for (double& x : v) x = std::ldexp(static_cast<double>(rng() >> 11), -53);
    return v;
}

void SigmaContamination(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const int n = static_cast<int>(state.range(0));
    const auto row = random_simplex(rng, n);
    const auto v = random_values(rng, n);
    const rcmdp::UncertaintyModel model = rcmdp::Contamination{0.2};
    for (auto _ : state)
        benchmark::DoNotOptimize(rcmdp::sigma_exact(model, row, v).sigma);
}
BENCHMARK(SigmaContamination)->Arg(4)->Arg(16)->Arg(64)->Arg(256);

void SigmaTotalVariation(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const int n = static_cast<int>(state.range(0));
    const auto row = random_simplex(rng, n);
    const auto v = random_values(rng, n);
    const rcmdp::UncertaintyModel model = rcmdp::TotalVariation{0.2};
    for (auto _ : state)
        benchmark::DoNotOptimize(rcmdp::sigma_exact(model, row, v).sigma);
}
BENCHMARK(SigmaTotalVariation)->Arg(4)->Arg(16)->Arg(64)->Arg(256);

void SigmaWassersteinPrimal(benchmark::State& state) {
    std::mt19937_64 rng(3);
    const int n = static_cast<int>(state.range(0));
    const auto row = random_simplex(rng, n);
    const auto v = random_values(rng, n);
    const rcmdp::UncertaintyModel model =
        rcmdp::Wasserstein{1.0, 0.2, rcmdp::line_metric(n)};
    for (auto _ : state)
        benchmark::DoNotOptimize(rcmdp::sigma_exact(model, row, v).sigma);
}
BENCHMARK(SigmaWassersteinPrimal)->Arg(4)->Arg(16)->Arg(64);

void SigmaWassersteinDual(benchmark::State& state) {
    std::mt19937_64 rng(4);
    const int n = static_cast<int>(state.range(0));
    const auto row = random_simplex(rng, n);
    const auto v = random_values(rng, n);
    const rcmdp::Wasserstein model{1.0, 0.2, rcmdp::line_metric(n)};
    for (auto _ : state)
        benchmark::DoNotOptimize(rcmdp::sigma_wasserstein_dual(model, row, v));
}
BENCHMARK(SigmaWassersteinDual)->Arg(4)->Arg(16)->Arg(64);

void MlmcEstimate(benchmark::State& state) {
    rcmdp::GarnetParams params;
    params.n_states = static_cast<int>(state.range(0));
    params.n_actions = 2;
    params.branching = params.n_states;
    const auto mdp = rcmdp::make_garnet(params, 11);
    rcmdp::GenerativeModel gm(mdp, 5);
    std::mt19937_64 rng(6);
    const auto v = random_values(rng, params.n_states);
    const rcmdp::UncertaintyModel model = rcmdp::TotalVariation{0.2};
    const rcmdp::MlmcConfig cfg{};
    for (auto _ : state)
        benchmark::DoNotOptimize(rcmdp::estimate_sigma_mlmc(gm, 0, 0, v, model, cfg));
}
BENCHMARK(MlmcEstimate)->Arg(3)->Arg(8)->Arg(32);

} // namespace

BENCHMARK_MAIN();
