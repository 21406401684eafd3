// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <Eigen/Core>
#include <random>

#include "autoscale/costs.hpp"
#include "autoscale/snapshot.hpp"
#include "autoscale/solver.hpp"

namespace {

autoscale::WindowBuffer random_window(std::size_t tasks, std::size_t length) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  autoscale::WindowBuffer window(length);
  std::vector<double> initial(tasks, 2.0);
  for (std::size_t t = 0; t < length; ++t) {
    Eigen::MatrixXd g(16, static_cast<Eigen::Index>(tasks));
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
    std::vector<double> losses(tasks);
    for (auto& l : losses) l = 1.0 + std::abs(normal(rng));
    window.push(autoscale::snapshot_from_gradients(g, t),
                autoscale::LossSnapshot(losses, initial, initial, t));
  }
  return window;
}

void BM_SolveWindow(benchmark::State& state) {
  const auto kind = static_cast<autoscale::CostKind>(state.range(0));
  const auto window = random_window(static_cast<std::size_t>(state.range(1)), 50);
  const auto w0 = autoscale::WeightVector::uniform(static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(autoscale::solve_window(kind, window, w0));
  state.SetLabel(std::string(autoscale::to_string(kind)));
}
BENCHMARK(BM_SolveWindow)
    ->Args({static_cast<int>(autoscale::CostKind::EqualGradNorm), 3})
    ->Args({static_cast<int>(autoscale::CostKind::EqualLoss), 3})
    ->Args({static_cast<int>(autoscale::CostKind::LowConditionNumber), 2})
    ->Args({static_cast<int>(autoscale::CostKind::LowConditionNumber), 3})
    ->Unit(benchmark::kMillisecond);

void BM_ProjectFeasible(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(1.0, 2.0);
  std::vector<double> raw(static_cast<std::size_t>(state.range(0)));
  for (auto& x : raw) x = normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(autoscale::project_feasible(raw));
}
BENCHMARK(BM_ProjectFeasible)->Arg(3)->Arg(16)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
