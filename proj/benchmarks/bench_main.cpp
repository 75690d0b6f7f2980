#include <benchmark/benchmark.h>

#include <random>

#include "acsparse/cli/config.hpp"
#include "acsparse/objective.hpp"
#include "acsparse/optimizer.hpp"
#include "acsparse/pde_solvers.hpp"
#include "acsparse/soc.hpp"

using namespace acsparse;

namespace {

Problem desk_problem(int n_x, int n_t) {
  ProblemSpec s = cli::parse_config("mesh.n_x = " + std::to_string(n_x) +
                                    "\ntime.n_t = " + std::to_string(n_t) + "\n")
                      .to_problem_spec();
  return Problem(s);
}

ControlPair probe_control(const Problem& p) {
  std::mt19937_64 rng(3);
  ControlPair u = random_control(p.mesh(), p.grid(), rng);
  u *= 0.3;
  return p.bounds().project(u);
}

void BM_SolveState(benchmark::State& state) {
  const Problem p = desk_problem(static_cast<int>(state.range(0)), 32);
  const ControlPair u = probe_control(p);
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_state(p.disc(), p.potentials(), p.y0(), u, p.solver()));
}
BENCHMARK(BM_SolveState)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SmoothGradient(benchmark::State& state) {
  const Problem p = desk_problem(static_cast<int>(state.range(0)), 32);
  const ControlPair u = probe_control(p);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_smooth(p, u));
}
BENCHMARK(BM_SmoothGradient)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_OptimizeIteration(benchmark::State& state) {
  ProblemSpec s = cli::parse_config("").to_problem_spec();
  s.optimizer.max_iters = 1;
  const Problem p(s);
  const ControlPair u = probe_control(p);
  for (auto _ : state) benchmark::DoNotOptimize(optimize(p, u));
}
BENCHMARK(BM_OptimizeIteration)->Unit(benchmark::kMillisecond);

void BM_Optimize(benchmark::State& state) {
  const Problem p = desk_problem(16, 32);
  for (auto _ : state) benchmark::DoNotOptimize(optimize(p));
}
BENCHMARK(BM_Optimize)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
