// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "autoscale/eval.hpp"
#include "autoscale/metrics.hpp"
#include "autoscale/problem.hpp"
#include "autoscale/scheduler.hpp"
#include "autoscale/weights.hpp"

namespace autoscale {

/// Trains one copy of the problem per task on that task alone and returns
/// the lowest noise-free loss each copy reached over `iterations` steps.
std::vector<double> run_stl_baselines(const MultiTaskProblem& problem, std::uint64_t iterations);

enum class SamplingScheme {
  /// K times a flat Dirichlet draw.
  DirichletUniform,
  /// Log-spaced weights. For K = 2 a deterministic ladder of ratios
  /// w_1/w_2 = 10^r, r evenly spaced in [-span, span]; for K > 2 a Latin
  /// hypercube over log10 w_k in [-span, span].
  LogUniformGrid,
};

std::string_view to_string(SamplingScheme scheme);
SamplingScheme parse_sampling_scheme(std::string_view name);

struct SamplingOptions {
  double log10_span = 1.5;
  double floor = kDefaultWeightFloor;
};

/// N distinct feasible weight vectors, reproducible from `seed`. Throws
/// InvalidArgument for N < 2 or K < 2.
std::vector<WeightVector> sample_weight_sets(std::size_t count, std::size_t num_tasks,
                                             std::uint64_t seed, SamplingScheme scheme,
                                             const SamplingOptions& options = {});

/// Random loss weighting: K softmax(z) with z ~ N(0, I), drawn from its own
/// stream for every (seed, iter).
WeightVector random_loss_weighting_step(std::size_t num_tasks, std::uint64_t seed,
                                        std::uint64_t iter, double floor = kDefaultWeightFloor);

/// Lower-is-better task scores of final losses against baselines B_k.
std::vector<TaskScore> loss_scores(std::span<const double> losses,
                                   std::span<const double> baselines);

/// Run means of the scalar trace metrics; NaN entries are left out.
struct MetricMeans {
  double gms = 0.0;
  double gcs = 0.0;
  double cond_number = 0.0;
  double ilr_std = 0.0;
  double rl_std = 0.0;
};

/// Streaming accumulator behind MetricMeans.
class MetricMeanAccumulator {
 public:
  void add(const MetricRecord& record);
  MetricMeans means() const;

 private:
  struct Sum {
    double total = 0.0;
    std::size_t count = 0;
    void add(double x);
    double mean() const;
  };
  Sum gms_, gcs_, cond_, ilr_std_, rl_std_;
};

/// Outcome of one fixed-weight run of a sweep.
struct SweepRun {
  WeightVector weights;
  std::vector<double> final_losses;  ///< noise-free
  double delta_m = 0.0;
  double delta_m_deg = 0.0;
  MetricMeans means;
  std::string error;  ///< nonempty when the run failed; numbers are NaN
};

/// Trains one fixed scalarization per weight vector for `iterations` steps
/// and scores it against `baselines`. Runs are independent and may execute
/// on up to `jobs` threads; the result order follows `weight_sets`. A
/// failing run is recorded in its SweepRun and does not stop the others.
/// `sink_for(j)`, when set, supplies the per-iteration sink of run j; it is
/// called on the thread that executes the run.
std::vector<SweepRun> run_sweep(const MultiTaskProblem& problem,
                                std::span<const WeightVector> weight_sets, std::uint64_t iterations,
                                std::span<const double> baselines, std::size_t jobs = 1,
                                const std::function<IterationSink(std::size_t)>& sink_for = {});

/// B_k: the closed-form optima when the problem has them, otherwise
/// run_stl_baselines over `iterations` steps.
std::vector<double> task_baselines(const MultiTaskProblem& problem, std::uint64_t iterations);

}  // namespace autoscale
