#include <benchmark/benchmark.h>

#include "pdmplab/branching.hpp"
#include "pdmplab/gene.hpp"
#include "pdmplab/ode.hpp"
#include "pdmplab/switched.hpp"

using namespace pdmplab;

static void BM_IntegrateSpiralFlow(benchmark::State& state) {
  const auto f = linear_field(switched::planar_matrix_1());
  Eigen::VectorXd x0(2);
  x0 << 1.0, 0.0;
  for (auto _ : state) {
    auto x = integrate_flow(f, x0, 1.0);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_IntegrateSpiralFlow);

static void BM_CtmcPath(benchmark::State& state) {
  const auto q = RateMatrix::symmetric_two_state(1.0);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    RngStream rng(1, rep++);
    auto path = simulate_ctmc(q, 0, 1000.0, rng);
    benchmark::DoNotOptimize(path);
  }
}
BENCHMARK(BM_CtmcPath);

static void BM_LyapunovReplica(benchmark::State& state) {
  const auto sys = switched::canonical_planar(2.0);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto est = switched::lyapunov_exponent(sys, 50.0, seed++, 2);
    benchmark::DoNotOptimize(est);
  }
}
BENCHMARK(BM_LyapunovReplica);

static void BM_BranchingTree(benchmark::State& state) {
  const auto spec = branching::constant_rate_spec(1.0);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    RngStream rng(2, rep++);
    auto tree = branching::simulate_tree(spec, 1.0, 3.0, rng);
    benchmark::DoNotOptimize(tree);
  }
}
BENCHMARK(BM_BranchingTree);

static void BM_GeneCycle(benchmark::State& state) {
  const gene::GeneParams p{2.0, 1.0, 2.0, 0.4, 1.0, 1.0};
  std::uint64_t rep = 0;
  gene::LineageOptions opt;
  opt.burn_in_cycles = 0;
  for (auto _ : state) {
    RngStream rng(3, rep++);
    auto samples = gene::simulate_cell_lineage(p, 100, {0.0}, rng, opt);
    benchmark::DoNotOptimize(samples);
  }
}
BENCHMARK(BM_GeneCycle);

static void BM_EquilibriumMoments(benchmark::State& state) {
  const gene::GeneParams p{2.0, 1.0, 2.0, 0.4, 1.0, 1.0};
  for (auto _ : state) {
    auto eq = gene::equilibrium_moments(p);
    benchmark::DoNotOptimize(eq);
  }
}
BENCHMARK(BM_EquilibriumMoments);

BENCHMARK_MAIN();
