// SPDX-License-Identifier: Apache-2.0
#include "autoscale/scheduler.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "autoscale/error.hpp"
#include "autoscale/random.hpp"

namespace autoscale {
namespace {

// Shared-state gradient descent loop: evaluates the problem, turns the
// evaluation into snapshots and applies the weighted update.
class DescentLoop {
 public:
  explicit DescentLoop(const MultiTaskProblem& problem)
      : problem_(problem), params_(problem.initial_params()) {
    if (problem.num_tasks() == 0) throw InvalidArgument("problem has no tasks");
    if (problem.num_shared_params() == 0 || problem.num_shared_params() > problem.num_params()) {
      throw InvalidArgument("problem reports an invalid shared-parameter block");
    }
  }

  void evaluate(std::uint64_t iter) {
    problem_.evaluate(params_, iter, eval_);
    if (eval_.losses.size() != problem_.num_tasks() ||
        static_cast<std::size_t>(eval_.gradients.cols()) != problem_.num_tasks() ||
        static_cast<std::size_t>(eval_.gradients.rows()) != problem_.num_params()) {
      throw Error("problem evaluation returned inconsistent shapes at iteration " +
                  std::to_string(iter));
    }
    if (!eval_.gradients.allFinite()) {
      throw Error("problem evaluation produced non-finite gradients at iteration " +
                  std::to_string(iter));
    }
  }

  std::pair<GradientSnapshot, LossSnapshot> observe(std::uint64_t iter) {
    evaluate(iter);
    if (!started_) {
      initial_ = eval_.losses;
      prev_ = eval_.losses;
      started_ = true;
    }
    const auto shared = static_cast<Eigen::Index>(problem_.num_shared_params());
    auto grad = snapshot_from_gradients(eval_.gradients.topRows(shared), iter);
    LossSnapshot loss(eval_.losses, initial_, prev_, iter);
    prev_ = eval_.losses;
    return {std::move(grad), std::move(loss)};
  }

  // Applies theta <- theta - h sum_k w_k grad_k using the last evaluation.
  void step(std::span<const double> weights) {
    const Eigen::Map<const Eigen::VectorXd> w(weights.data(),
                                              static_cast<Eigen::Index>(weights.size()));
    params_.noalias() -= problem_.step_size() * (eval_.gradients * w);
  }

  const Eigen::VectorXd& params() const { return params_; }
  const std::vector<double>& losses() const { return eval_.losses; }

 private:
  const MultiTaskProblem& problem_;
  Eigen::VectorXd params_;
  TaskEvaluation eval_;
  std::vector<double> initial_;
  std::vector<double> prev_;
  bool started_ = false;
};

void emit(const RunOptions& options, std::vector<IterationRecord>& trace, IterationRecord record) {
  if (options.sink) options.sink(record);
  if (options.keep_trace) trace.push_back(std::move(record));
}

IterationRecord make_record(const GradientSnapshot& grad, const LossSnapshot& loss,
                            const WeightVector& w) {
  IterationRecord r{metric_record(grad, loss, w), {loss.losses().begin(), loss.losses().end()},
                    grad};
  return r;
}

void check_weights_match(const MultiTaskProblem& problem, std::size_t size) {
  if (size != problem.num_tasks()) {
    throw InvalidArgument("weights have " + std::to_string(size) + " entries but the problem has " +
                          std::to_string(problem.num_tasks()) + " tasks");
  }
}

}  // namespace

std::uint64_t AutoScaleConfig::exploration_iters() const {
  return static_cast<std::uint64_t>(std::llround(exploration_ratio * static_cast<double>(total_iters)));
}

std::uint64_t AutoScaleConfig::num_windows() const {
  return window_size == 0 ? 0 : exploration_iters() / window_size;
}

void AutoScaleConfig::validate() const {
  if (total_iters == 0) throw InvalidArgument("total iterations must be positive");
  if (!(exploration_ratio >= 0.0 && exploration_ratio <= 1.0)) {
    throw InvalidArgument("exploration ratio must lie in [0, 1]");
  }
  if (window_size == 0) throw InvalidArgument("window size must be positive");
  if (aggregation_size == 0) throw InvalidArgument("aggregation size must be positive");
  if (snapshot_stride == 0) throw InvalidArgument("snapshot stride must be positive");
  if (snapshot_stride > window_size) throw InvalidArgument("snapshot stride exceeds the window size");
  if (!(weight_floor >= 0.0 && weight_floor < 1.0)) {
    throw InvalidArgument("weight floor must lie in [0, 1)");
  }
  const double explore = exploration_ratio * static_cast<double>(total_iters);
  if (std::abs(explore - std::round(explore)) > 1e-9 * static_cast<double>(total_iters)) {
    throw InvalidArgument("alpha * T = " + std::to_string(explore) + " is not an integer");
  }
  const auto explore_iters = exploration_iters();
  if (explore_iters == 0) return;
  if (explore_iters % window_size != 0) {
    throw InvalidArgument("window size " + std::to_string(window_size) +
                          " does not divide the " + std::to_string(explore_iters) +
                          " exploration iterations");
  }
  if (aggregation_size > num_windows()) {
    throw InvalidArgument("aggregation size " + std::to_string(aggregation_size) + " exceeds the " +
                          std::to_string(num_windows()) +
                          " exploration windows; increase T or alpha, or lower eta");
  }
}

TrainingResult run_weight_schedule(const MultiTaskProblem& problem,
                                   const std::function<WeightVector(std::uint64_t)>& schedule,
                                   std::uint64_t iterations, const RunOptions& options) {
  DescentLoop loop(problem);
  TrainingResult result;
  if (options.keep_trace) result.trace.reserve(iterations);
  for (std::uint64_t t = 0; t < iterations; ++t) {
    const WeightVector w = schedule(t);
    check_weights_match(problem, w.size());
    auto [grad, loss] = loop.observe(t);
    emit(options, result.trace, make_record(grad, loss, w));
    loop.step(w.values());
  }
  result.params = loop.params();
  return result;
}

TrainingResult run_fixed_scalarization(const MultiTaskProblem& problem, const WeightVector& weights,
                                       std::uint64_t iterations, const RunOptions& options) {
  check_weights_match(problem, weights.size());
  return run_weight_schedule(
      problem, [&](std::uint64_t) { return weights; }, iterations, options);
}

Eigen::VectorXd train_with_raw_weights(
    const MultiTaskProblem& problem, std::span<const double> weights, std::uint64_t iterations,
    const std::function<void(std::uint64_t, const Eigen::VectorXd&)>& observe) {
  check_weights_match(problem, weights.size());
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("raw weights must be finite and nonnegative");
  }
  DescentLoop loop(problem);
  for (std::uint64_t t = 0; t < iterations; ++t) {
    if (observe) observe(t, loop.params());
    loop.evaluate(t);
    loop.step(weights);
  }
  if (observe) observe(iterations, loop.params());
  return loop.params();
}

WeightVector aggregate_final_weight(std::span<const WeightVector> window_weights, std::size_t eta,
                                    double floor) {
  if (eta == 0) throw InvalidArgument("aggregation size must be positive");
  if (window_weights.size() < eta) {
    throw InvalidArgument("need " + std::to_string(eta) + " window weights to aggregate, have " +
                          std::to_string(window_weights.size()) +
                          "; lengthen exploration or lower the aggregation size");
  }
  const auto k = window_weights.back().size();
  std::vector<double> mean(k, 0.0);
  for (std::size_t j = window_weights.size() - eta; j < window_weights.size(); ++j) {
    if (window_weights[j].size() != k) throw InvalidArgument("window weights differ in length");
    for (std::size_t i = 0; i < k; ++i) mean[i] += window_weights[j][i];
  }
  for (auto& x : mean) x /= static_cast<double>(eta);
  return project_feasible(mean, floor);
}

AutoScaleResult run_autoscale(const MultiTaskProblem& problem, const AutoScaleConfig& config,
                              const RunOptions& options) {
  config.validate();
  const auto k = problem.num_tasks();
  if (k < 2) throw InvalidArgument("AutoScale needs at least two tasks");

  const std::uint64_t total = config.total_iters;
  const std::uint64_t explore = config.exploration_iters();
  const std::uint64_t tau = config.window_size;
  const std::uint64_t stride = config.snapshot_stride;
  const auto capacity = static_cast<std::size_t>((tau + stride - 1) / stride);

  AutoScaleResult result{{}, WeightHistory{{}, WeightVector::uniform(k), {}}, {}};
  auto& history = result.history;
  history.per_iteration.reserve(total);
  if (options.keep_trace) result.trace.reserve(total);

  DescentLoop loop(problem);
  WindowBuffer window(capacity, stride);
  std::vector<WeightVector> window_weights;
  WeightVector w = WeightVector::uniform(k);

  const auto finish_exploration = [&] {
    if (!window_weights.empty()) {
      history.final_weight =
          aggregate_final_weight(window_weights, config.aggregation_size, config.weight_floor);
    }
    w = history.final_weight;
  };

  for (std::uint64_t t = 0; t < total; ++t) {
    if (t == explore && explore > 0) finish_exploration();

    auto [grad, loss] = loop.observe(t);
    history.per_iteration.push_back(w);
    emit(options, result.trace, make_record(grad, loss, w));

    const bool exploring = t < explore;
    if (exploring && (t % tau) % stride == 0) window.push(std::move(grad), std::move(loss));
    loop.step(w.values());

    if (exploring && (t + 1) % tau == 0) {
      const auto index = static_cast<std::size_t>((t + 1) / tau);
      SearchOptions search;
      search.floor = config.weight_floor;
      search.max_evaluations = config.solver_evaluations;
      search.restarts = config.solver_restarts;
      search.seed = split_seed(config.seed, SeedStream::SolverRestarts, index);
      const auto before = window_cost_detail(config.cost_kind, w.values(), window);
      SolverReport report = solve_window(config.cost_kind, window, w, search);
      history.windows.push_back(WindowSolve{index, t + 1 - tau, w, report.w_star, before.value,
                                            report.cost_at_w_star, before.skipped,
                                            report.converged, report.method});
      window_weights.push_back(report.w_star);
      w = report.w_star;
      window.clear();
    }
  }
  if (explore == total && explore > 0) finish_exploration();

  result.params = loop.params();
  return result;
}

}  // namespace autoscale
