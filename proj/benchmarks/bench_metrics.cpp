// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <Eigen/Core>
#include <random>

#include "autoscale/metrics.hpp"
#include "autoscale/snapshot.hpp"

namespace {

Eigen::MatrixXd random_gradients(Eigen::Index dim, Eigen::Index tasks) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(dim, tasks);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
  return g;
}

void BM_SnapshotFromGradients(benchmark::State& state) {
  const auto g = random_gradients(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(autoscale::snapshot_from_gradients(g));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_SnapshotFromGradients)->Args({1000, 3})->Args({10000, 3})->Args({10000, 8});

void BM_ConditionNumber(benchmark::State& state) {
  const auto snap = autoscale::snapshot_from_gradients(random_gradients(64, state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(autoscale::condition_number(snap));
}
BENCHMARK(BM_ConditionNumber)->Arg(2)->Arg(3)->Arg(8)->Arg(16);

void BM_MetricRecord(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto snap = autoscale::snapshot_from_gradients(random_gradients(64, state.range(0)));
  std::vector<double> losses(k, 1.0);
  const autoscale::LossSnapshot loss(losses, losses, losses, 0);
  const auto w = autoscale::WeightVector::uniform(k);
  for (auto _ : state) benchmark::DoNotOptimize(autoscale::metric_record(snap, loss, w));
}
BENCHMARK(BM_MetricRecord)->Arg(2)->Arg(3)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
