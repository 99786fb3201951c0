#include <benchmark/benchmark.h>

#include "markvi/harness.hpp"
#include "markvi/markov_chain.hpp"
#include "markvi/oracle.hpp"
#include "markvi/problem.hpp"
#include "markvi/solver.hpp"

namespace {

using namespace markvi;

void BM_AssembleOperator(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const SaddleInstance inst = build_saddle_instance(d, 1.0, 1.0, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_operator(inst));
  }
}
BENCHMARK(BM_AssembleOperator)->Arg(8)->Arg(32)->Arg(128);

void BM_SpectralNorm(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const AffineVIOperator op = assemble_operator(build_saddle_instance(d, 1.0, 1.0, 1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral_norm_power_iteration(op.M));
  }
}
BENCHMARK(BM_SpectralNorm)->Arg(8)->Arg(32)->Arg(128);

void BM_ExtragradientRun(benchmark::State& state) {
  const AffineVIOperator op = assemble_operator(build_saddle_instance(10, 1.0, 1.0, 1));
  const MarkovNoiseChain chain = two_state_chain(0.9, NoiseDistribution::gaussian(0.1, 0.1),
                                                 NoiseDistribution::gaussian(-0.1, 0.1));
  SolverConfig cfg;
  cfg.gamma = 1.0 / (2.0 * op.L);
  cfg.T = state.range(0);
  cfg.z0 = Eigen::VectorXd::Zero(op.dim);
  cfg.seed = 7;
  cfg.store_iterates = TraceStorage::Never;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(op, chain, cfg, OracleMode::Markov));
  }
  state.SetItemsProcessed(state.iterations() * cfg.T);
}
BENCHMARK(BM_ExtragradientRun)->Arg(1000)->Arg(10000);

void BM_MixingTime(benchmark::State& state) {
  const NoiseDistribution silent = NoiseDistribution::constant(0.0);
  const MarkovNoiseChain chain =
      two_state_chain(state.range(0) / 100.0, silent, silent);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mixing_time(chain, 0.05));
  }
}
BENCHMARK(BM_MixingTime)->Arg(60)->Arg(90)->Arg(99);

void BM_SampleTrajectory(benchmark::State& state) {
  const NoiseDistribution silent = NoiseDistribution::constant(0.0);
  const MarkovNoiseChain chain = two_state_chain(0.9, silent, silent);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_trajectory(chain, state.range(0), 3));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleTrajectory)->Arg(100000);

void BM_SeedDerivation(benchmark::State& state) {
  std::uint64_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(seed_derivation(42, {1, 2, ++k}));
  }
}
BENCHMARK(BM_SeedDerivation);

}  // namespace

BENCHMARK_MAIN();
