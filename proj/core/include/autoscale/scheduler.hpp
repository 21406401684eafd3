// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "autoscale/costs.hpp"
#include "autoscale/metrics.hpp"
#include "autoscale/problem.hpp"
#include "autoscale/snapshot.hpp"
#include "autoscale/solver.hpp"
#include "autoscale/weights.hpp"

namespace autoscale {

/// Everything observed at one training iteration, before the update.
struct IterationRecord {
  MetricRecord metrics;
  std::vector<double> losses;
  GradientSnapshot grad;  ///< unweighted shared-parameter gradients
};

using IterationSink = std::function<void(const IterationRecord&)>;

struct AutoScaleConfig {
  std::uint64_t total_iters = 0;          ///< T
  double exploration_ratio = 0.2;         ///< alpha
  std::uint64_t window_size = 50;         ///< tau
  std::size_t aggregation_size = 10;      ///< eta
  CostKind cost_kind = CostKind::LowConditionNumber;
  std::uint64_t seed = 0;
  std::uint64_t snapshot_stride = 1;      ///< buffer every n-th iteration of a window
  double weight_floor = kDefaultWeightFloor;
  std::size_t solver_evaluations = 20000; ///< budget of the derivative-free search
  std::size_t solver_restarts = 4;

  /// alpha T; requires alpha T to be an integer.
  std::uint64_t exploration_iters() const;
  /// alpha T / tau.
  std::uint64_t num_windows() const;

  /// Throws InvalidArgument unless T > 0, alpha in [0, 1], alpha T integral,
  /// tau divides alpha T, and (for alpha > 0) eta <= alpha T / tau.
  void validate() const;
};

/// Solver outcome for one exploration window.
struct WindowSolve {
  std::size_t window = 0;          ///< 1-based window index i
  std::uint64_t first_iter = 0;
  WeightVector trained_with;       ///< w^{i-1}
  WeightVector weights;            ///< w^i
  double cost_before = 0.0;        ///< window_cost(w^{i-1})
  double cost_after = 0.0;         ///< window_cost(w^i)
  std::size_t skipped = 0;         ///< degenerate snapshots left out of the mean
  bool converged = false;
  SolverMethod method = SolverMethod::ClosedFormQP;
};

struct WeightHistory {
  std::vector<WindowSolve> windows;
  WeightVector final_weight;                  ///< w-hat
  std::vector<WeightVector> per_iteration;    ///< weight used at each iteration
};

struct TrainingResult {
  Eigen::VectorXd params;
  std::vector<IterationRecord> trace;
};

struct AutoScaleResult {
  Eigen::VectorXd params;
  WeightHistory history;
  std::vector<IterationRecord> trace;
};

struct RunOptions {
  bool keep_trace = true;  ///< store every IterationRecord in the result
  IterationSink sink;      ///< called once per iteration when set
};

/// Gradient descent on sum_k w_k l_k for `iterations` steps, logging a
/// MetricRecord per iteration.
TrainingResult run_fixed_scalarization(const MultiTaskProblem& problem, const WeightVector& weights,
                                       std::uint64_t iterations, const RunOptions& options = {});

/// Gradient descent where iteration t uses schedule(t); used for random
/// loss weighting.
TrainingResult run_weight_schedule(const MultiTaskProblem& problem,
                                   const std::function<WeightVector(std::uint64_t)>& schedule,
                                   std::uint64_t iterations, const RunOptions& options = {});

/// Gradient descent with arbitrary nonnegative task weights and no metric
/// logging (single-task training passes a one-hot vector). Calls `observe`
/// with the parameters before every step and once after the last one.
Eigen::VectorXd train_with_raw_weights(
    const MultiTaskProblem& problem, std::span<const double> weights, std::uint64_t iterations,
    const std::function<void(std::uint64_t, const Eigen::VectorXd&)>& observe = {});

/// Mean of the last `eta` window weights, re-projected onto the feasible
/// set. Throws InvalidArgument when fewer than eta weights are given.
WeightVector aggregate_final_weight(std::span<const WeightVector> window_weights, std::size_t eta,
                                    double floor = kDefaultWeightFloor);

/// Two-phase training. Phase 1 trains alpha T / tau windows of tau steps,
/// window i with w^{i-1} (w^0 = 1), and re-solves the window cost at the end
/// of each window. Phase 2 trains the remaining (1 - alpha) T steps with the
/// mean of the last eta window weights.
AutoScaleResult run_autoscale(const MultiTaskProblem& problem, const AutoScaleConfig& config,
                              const RunOptions& options = {});

}  // namespace autoscale
