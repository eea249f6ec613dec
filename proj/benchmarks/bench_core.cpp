#include <benchmark/benchmark.h>

#include "npglab/algorithms.hpp"
#include "npglab/solver.hpp"

using namespace npglab;

namespace {

Mdp bench_mdp(int states, int actions) { return random_mdp({7}, states, actions, 0.9); }

void BM_EvaluatePolicy(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mdp mdp = bench_mdp(n, 10);
  const Policy pi = uniform_policy(n, 10);
  for (auto _ : state) {
    ValueFn v = evaluate_policy(mdp, pi);
    benchmark::DoNotOptimize(v.v.data());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_EvaluatePolicy)->Arg(8)->Arg(70)->Arg(200)->Complexity();

void BM_ValueIteration(benchmark::State& state) {
  const Mdp mdp = bench_mdp(70, 10);
  for (auto _ : state) {
    ViResult res = value_iteration(mdp);
    benchmark::DoNotOptimize(res.v_star.v.data());
  }
}
BENCHMARK(BM_ValueIteration);

void BM_NpgStep(benchmark::State& state) {
  const Mdp mdp = bench_mdp(70, 10);
  const Policy pi = uniform_policy(70, 10);
  const QFn q = q_from_policy(mdp, evaluate_policy(mdp, pi));
  for (auto _ : state) {
    Policy next = npg_step(pi, q, 2.3);
    benchmark::DoNotOptimize(next.log_prob.data());
  }
}
BENCHMARK(BM_NpgStep);

void BM_AdaptiveIteration(benchmark::State& state) {
  // One full adaptive iteration: evaluate, greedy report, step selection,
  // update, and the gap against the renormalized target.
  const Mdp mdp = bench_mdp(70, 10);
  const Policy pi = uniform_policy(70, 10);
  for (auto _ : state) {
    const ValueFn v = evaluate_policy(mdp, pi);
    const QFn q = q_from_policy(mdp, v);
    const GreedyReport greedy = greedy_report(q);
    const double eta = adaptive_eta(pi, greedy, 0.105);
    Policy next = npg_step(pi, q, eta);
    benchmark::DoNotOptimize(max_probability_gap(next, pi_target(pi, greedy)));
  }
}
BENCHMARK(BM_AdaptiveIteration);

void BM_DiscountedVisitation(benchmark::State& state) {
  const Mdp mdp = bench_mdp(70, 10);
  const Policy pi = uniform_policy(70, 10);
  const InitialDist rho = uniform_dist(70);
  for (auto _ : state) {
    VisitDist d = discounted_visitation(mdp, pi, rho);
    benchmark::DoNotOptimize(d.d.data());
  }
}
BENCHMARK(BM_DiscountedVisitation);

void BM_PolicyIteration(benchmark::State& state) {
  const Mdp mdp = bench_mdp(70, 10);
  for (auto _ : state) {
    PiResult res = policy_iteration(mdp);
    benchmark::DoNotOptimize(res.policy.log_prob.data());
  }
}
BENCHMARK(BM_PolicyIteration);

}  // namespace

BENCHMARK_MAIN();
