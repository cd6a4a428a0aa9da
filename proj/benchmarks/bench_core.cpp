#include <benchmark/benchmark.h>

#include <vector>

#include "simplex_eval/hmc_engine.hpp"
#include "simplex_eval/measures.hpp"
#include "simplex_eval/prob_distributions.hpp"
#include "simplex_eval/rng.hpp"
#include "simplex_eval/simplex_geometry.hpp"

namespace {

using namespace simplex_eval;

void bm_rotation_round_trip(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const SimplexRotation rot = build_rotation(k);
  RngStream rng(7);
  const std::vector<double> alpha(static_cast<std::size_t>(k), 2.0);
  const ProbVec p(dirichlet_sample(alpha, rng));
  for (auto _ : state) {
    const Eigen::VectorXd z = to_reduced(rot, p);
    benchmark::DoNotOptimize(from_reduced(rot, z));
  }
}
BENCHMARK(bm_rotation_round_trip)->Arg(3)->Arg(20);

void bm_dirichlet_sample(benchmark::State& state) {
  RngStream rng(7);
  const std::vector<double> alpha(static_cast<std::size_t>(state.range(0)), 5.0);
  for (auto _ : state) benchmark::DoNotOptimize(dirichlet_sample(alpha, rng));
}
BENCHMARK(bm_dirichlet_sample)->Arg(3)->Arg(20);

void bm_normalized_euclidean(benchmark::State& state) {
  RngStream rng(7);
  const std::vector<double> alpha(static_cast<std::size_t>(state.range(0)), 5.0);
  const std::vector<double> a = dirichlet_sample(alpha, rng);
  const std::vector<double> b = dirichlet_sample(alpha, rng);
  for (auto _ : state) benchmark::DoNotOptimize(normalized_euclidean(a, b));
}
BENCHMARK(bm_normalized_euclidean)->Arg(3)->Arg(20);

void bm_kl_divergence(benchmark::State& state) {
  RngStream rng(7);
  const std::vector<double> alpha(static_cast<std::size_t>(state.range(0)), 5.0);
  const std::vector<double> a = dirichlet_sample(alpha, rng);
  const std::vector<double> b = dirichlet_sample(alpha, rng);
  for (auto _ : state) benchmark::DoNotOptimize(kl_divergence(a, b));
}
BENCHMARK(bm_kl_divergence)->Arg(3)->Arg(20);

void bm_hmc_step_gaussian(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const LogTargetFn logp = [](const Eigen::VectorXd& q) { return -0.5 * q.squaredNorm(); };
  const GradFn grad = [](const Eigen::VectorXd& q) { return Eigen::VectorXd(-q); };
  HmcConfig cfg;
  ChainState chain(cfg.trace_capacity);
  chain.position = Eigen::VectorXd::Zero(dim);
  chain.log_target = 0.0;
  chain.grad = Eigen::VectorXd::Zero(dim);
  chain.step_size = 0.5;
  chain.adaptation_frozen = true;
  RngStream rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(hmc_step(logp, grad, cfg, chain, rng));
}
BENCHMARK(bm_hmc_step_gaussian)->Arg(2)->Arg(12);

}  // namespace

BENCHMARK_MAIN();
