#include <benchmark/benchmark.h>

#include <random>

#include "ree/penalties.hpp"

namespace {

ree::Vector random_vector(ree::Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  ree::Vector v(p);
  for (ree::Index j = 0; j < p; ++j) v[j] = normal(rng);
  return v;
}

ree::GroupPartition groups_of_five(ree::Index p) {
  std::vector<std::vector<ree::Index>> groups;
  for (ree::Index s = 0; s < p; s += 5) {
    auto& g = groups.emplace_back();
    for (ree::Index j = s; j < std::min(p, s + 5); ++j) g.push_back(j);
  }
  return ree::GroupPartition(std::move(groups));
}

void run_prox(benchmark::State& state, const ree::PenaltySpec& spec) {
  const ree::Vector v = random_vector(state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(ree::prox(spec, v, 0.5));
  state.SetComplexityN(state.range(0));
}

void BM_ProxLasso(benchmark::State& state) { run_prox(state, ree::PenaltySpec::lasso()); }
void BM_ProxElasticNet(benchmark::State& state) { run_prox(state, ree::PenaltySpec::elastic_net(0.5)); }
void BM_ProxGroupLasso(benchmark::State& state) {
  run_prox(state, ree::PenaltySpec::group_lasso(groups_of_five(state.range(0))));
}
void BM_ProxSparseGroupLasso(benchmark::State& state) {
  run_prox(state, ree::PenaltySpec::sparse_group_lasso(groups_of_five(state.range(0)), 0.5));
}
void BM_ProjectL1Ball(benchmark::State& state) {
  run_prox(state, ree::PenaltySpec::ball_indicator(ree::BallConstraint::l1(1.0)));
}

BENCHMARK(BM_ProxLasso)->RangeMultiplier(4)->Range(16, 4096)->Complexity();
BENCHMARK(BM_ProxElasticNet)->RangeMultiplier(4)->Range(16, 4096)->Complexity();
BENCHMARK(BM_ProxGroupLasso)->RangeMultiplier(4)->Range(16, 4096)->Complexity();
BENCHMARK(BM_ProxSparseGroupLasso)->RangeMultiplier(4)->Range(16, 4096)->Complexity();
BENCHMARK(BM_ProjectL1Ball)->RangeMultiplier(4)->Range(16, 4096)->Complexity(benchmark::oNLogN);

}  // namespace

BENCHMARK_MAIN();
