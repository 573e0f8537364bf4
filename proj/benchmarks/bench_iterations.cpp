// Cost of one iteration: a GRA-adaptive step needs two products with X, an LQA
// step factors a p x p system.
#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "ree/solvers.hpp"

namespace {

struct Instance {
  ree::EstimatingProblem problem;
  ree::CoefficientVector start;
};

Instance make_instance(ree::Index p) {
  constexpr ree::Index n = 50;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  ree::Matrix x(n, p);
  for (ree::Index i = 0; i < n; ++i)
    for (ree::Index j = 0; j < p; ++j) x(i, j) = normal(rng) / std::sqrt(static_cast<double>(n));
  ree::Vector truth = ree::Vector::Zero(p);
  for (ree::Index j = 0; j < 5; ++j) truth[j] = j % 2 ? -2.0 : 2.0;
  ree::Vector y = x * truth;
  for (ree::Index i = 0; i < n; ++i) y[i] += 0.1 * normal(rng);
  auto u = std::make_shared<ree::LeastSquaresEstimating>(x, y);
  const double lambda = 0.1 * ree::lasso_lambda_max(*u);
  const ree::Matrix system = u->gram() + lambda * ree::Matrix::Identity(p, p);
  ree::Vector ridge = system.ldlt().solve(x.transpose() * y);
  return {{u, ree::PenaltySpec::lasso(), lambda}, ree::CoefficientVector(std::move(ridge))};
}

void run_fixed_iterations(benchmark::State& state, ree::Method method) {
  const Instance inst = make_instance(state.range(0));
  ree::SolverConfig config;
  config.max_iter = 20;
  config.tol = 1e-300;
  config.tau = 1.0 / *ree::lipschitz_upper_bound(*inst.problem.u);
  for (auto _ : state) {
    auto report = ree::solve(inst.problem, config, inst.start, method);
    benchmark::DoNotOptimize(report.solution);
  }
  state.counters["iterations"] = config.max_iter;
  state.SetComplexityN(state.range(0));
}

void BM_GraAdaptive20(benchmark::State& state) { run_fixed_iterations(state, ree::Method::GraAdaptive); }
void BM_Lqa20(benchmark::State& state) { run_fixed_iterations(state, ree::Method::Lqa); }

BENCHMARK(BM_GraAdaptive20)->Arg(50)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMicrosecond)->Complexity();
BENCHMARK(BM_Lqa20)->Arg(50)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond)->Complexity();

}  // namespace
