#include <benchmark/benchmark.h>

#include "xpi/approx.hpp"
#include "xpi/concentrability.hpp"
#include "xpi/garnet.hpp"
#include "xpi/kappa.hpp"
#include "xpi/mdp.hpp"
#include "xpi/online.hpp"

namespace {

xpi::Mdp bench_mdp(int n_states, int n_actions) {
    return xpi::generate_garnet(xpi::GarnetSpec::standard(n_states, n_actions, 12345));
}

void BM_evaluate_policy(benchmark::State& state) {
    xpi::Mdp mdp = bench_mdp(static_cast<int>(state.range(0)), 4);
    xpi::Policy pi = xpi::Policy::uniform(mdp.n_states, mdp.n_actions);
    for (auto _ : state) {
        benchmark::DoNotOptimize(xpi::evaluate_policy(mdp, pi));
    }
}
BENCHMARK(BM_evaluate_policy)->Arg(10)->Arg(50)->Arg(200);

void BM_solve_optimal(benchmark::State& state) {
    xpi::Mdp mdp = bench_mdp(static_cast<int>(state.range(0)), 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(xpi::solve_optimal(mdp, 1e-8));
    }
}
BENCHMARK(BM_solve_optimal)->Arg(10)->Arg(50)->Arg(200);

void BM_kappa_greedy(benchmark::State& state) {
    xpi::Mdp mdp = bench_mdp(static_cast<int>(state.range(0)), 4);
    xpi::ValueFunction v = xpi::ValueFunction::Zero(mdp.n_states);
    for (auto _ : state) {
        benchmark::DoNotOptimize(xpi::kappa_greedy_policy(mdp, v, 0.5, 1e-8));
    }
}
BENCHMARK(BM_kappa_greedy)->Arg(10)->Arg(50);

void BM_online_steps(benchmark::State& state) {
    xpi::Mdp mdp = bench_mdp(10, 3);
    xpi::StateDistribution nu = xpi::StateDistribution::uniform(10);
    xpi::StepSchedule sched;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            xpi::run_online(mdp, nu, 0.5, sched, state.range(0), 7, state.range(0)));
    }
}
BENCHMARK(BM_online_steps)->Arg(10000)->Arg(100000);

void BM_ratio_sequence_dp(benchmark::State& state) {
    xpi::Mdp mdp = bench_mdp(static_cast<int>(state.range(0)), 3);
    xpi::StateDistribution uniform = xpi::StateDistribution::uniform(mdp.n_states);
    for (auto _ : state) {
        benchmark::DoNotOptimize(xpi::c_seq(mdp, uniform, uniform, 50));
    }
}
BENCHMARK(BM_ratio_sequence_dp)->Arg(10)->Arg(30);

}  // namespace

BENCHMARK_MAIN();
