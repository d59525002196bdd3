// Microbenchmarks for the hot paths: the H_w matvec that dominates every
// eigensolve, the Lanczos slice itself, the end-to-end reflection run, and
// the exhaustive pieces (diagonal build, brute force) that gate instance
// setup. Sizes follow the simulator's working range; the largest matvec case
// is n = 13 (dim 8192).

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "rba/dynamics.hpp"
#include "rba/eigensolve.hpp"
#include "rba/grover.hpp"
#include "rba/instance.hpp"
#include "rba/problem.hpp"
#include "rba/rng.hpp"
#include "rba/schedule.hpp"
#include "rba/state_vector.hpp"

namespace {

using namespace rba;

// One deterministic instance per n, clause ratio 8 (the hard regime used by
// the studies). Cached so setup cost stays out of the timed region.
const ProblemContext& instance_for(int n) {
  static std::map<int, ProblemContext> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, make_problem(generate(n, Rational::of(8, 1), 1))).first;
  }
  return it->second;
}

StateVector random_state(int n, std::uint64_t seed) {
  Rng rng(seed);
  StateVector v(std::size_t{1} << n);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = rng.symmetric();
  scale(v, 1.0 / norm(v));
  return v;
}

void BM_ApplyInterpolated(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ProblemContext& ctx = instance_for(n);
  const InterpolatedHamiltonian h{&ctx.ham, 0.5};
  StateVector x = random_state(n, 7);
  StateVector y(x.size());
  for (auto _ : state) {
    h.apply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_ApplyInterpolated)->DenseRange(8, 13, 1);

void BM_BuildDiagonal(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SatInstance inst = generate(n, Rational::of(8, 1), 1);
  for (auto _ : state) {
    DiagonalEnergies diag = build_diagonal(inst);
    benchmark::DoNotOptimize(diag.values.data());
  }
}
BENCHMARK(BM_BuildDiagonal)->DenseRange(8, 13, 1);

void BM_BruteForce(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SatInstance inst = generate(n, Rational::of(8, 1), 1);
  for (auto _ : state) {
    BruteForceResult r = brute_force(inst);
    benchmark::DoNotOptimize(r.max_satisfied);
  }
}
BENCHMARK(BM_BruteForce)->DenseRange(8, 13, 1);

void BM_LanczosSlice(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ProblemContext& ctx = instance_for(n);
  const InterpolatedHamiltonian h{&ctx.ham, 0.5};
  LanczosOptions opt;
  opt.k_distinct = 3;
  for (auto _ : state) {
    SpectrumSlice slice = lanczos_lowest(h, opt);
    benchmark::DoNotOptimize(slice.e0);
  }
}
BENCHMARK(BM_LanczosSlice)->DenseRange(8, 12, 2)->Unit(benchmark::kMillisecond);

void BM_Reflect(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  // Reflection through a 2-dimensional subspace, the common case once the
  // ground level is degenerate or the mode includes the first excited level.
  std::vector<StateVector> basis;
  StateVector a = random_state(n, 11);
  StateVector b = random_state(n, 12);
  axpy(-dot(b, a), a, b);
  scale(b, 1.0 / norm(b));
  basis.push_back(std::move(a));
  basis.push_back(std::move(b));
  const StateVector x = random_state(n, 13);
  for (auto _ : state) {
    StateVector y = reflect(x, basis);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_Reflect)->DenseRange(8, 13, 1);

void BM_RunRbaEquidistant(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ProblemContext& ctx = instance_for(n);
  const Schedule sched = equidistant(3, ThresholdMode::BelowSecondExcited);
  // Warm cache outside the loop: the repeated-run cost is what a schedule
  // optimizer pays per objective evaluation.
  SliceCache cache(ctx, slice_levels(sched.mode));
  run_rba(ctx, sched.weights, sched.mode, &cache);
  for (auto _ : state) {
    RbaOutcome out = run_rba(ctx, sched.weights, sched.mode, &cache);
    benchmark::DoNotOptimize(out.p_success);
  }
}
BENCHMARK(BM_RunRbaEquidistant)->DenseRange(8, 12, 2)->Unit(benchmark::kMillisecond);

void BM_RunRbaColdCache(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ProblemContext& ctx = instance_for(n);
  const Schedule sched = equidistant(3, ThresholdMode::BelowSecondExcited);
  for (auto _ : state) {
    SliceCache cache(ctx, slice_levels(sched.mode));
    RbaOutcome out = run_rba(ctx, sched.weights, sched.mode, &cache);
    benchmark::DoNotOptimize(out.p_success);
  }
}
BENCHMARK(BM_RunRbaColdCache)->DenseRange(8, 12, 2)->Unit(benchmark::kMillisecond);

void BM_OptimizeSchedule(benchmark::State& state) {
  const ProblemContext& ctx = instance_for(static_cast<int>(state.range(0)));
  NelderMeadConfig cfg;
  cfg.max_evals = 40;
  cfg.seed = 7;
  for (auto _ : state) {
    SliceCache cache(ctx, slice_levels(ThresholdMode::BelowSecondExcited));
    OptimizeResult r =
        optimize_weights(ctx, 2, ThresholdMode::BelowSecondExcited, cfg, &cache);
    benchmark::DoNotOptimize(r.p_fail);
  }
}
BENCHMARK(BM_OptimizeSchedule)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_GroverAnalyze(benchmark::State& state) {
  const ProblemContext& ctx = instance_for(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    GroverAnalysis g = grover_analyze(ctx);
    benchmark::DoNotOptimize(g.n_opt);
  }
}
BENCHMARK(BM_GroverAnalyze)->Arg(10)->Arg(13);

}  // namespace

BENCHMARK_MAIN();
