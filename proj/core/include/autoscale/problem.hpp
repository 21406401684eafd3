// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace autoscale {

/// Losses and per-task gradients at one parameter point.
struct TaskEvaluation {
  std::vector<double> losses;  ///< K training losses
  Eigen::MatrixXd gradients;   ///< num_params x K; column k is grad of task k
};

/// A multi-task training problem trained by plain gradient descent.
///
/// Shared parameters occupy the leading num_shared_params() entries of the
/// parameter vector; all gradient metrics use only that block. Task-specific
/// parameters (if any) follow.
class MultiTaskProblem {
 public:
  virtual ~MultiTaskProblem() = default;

  virtual std::size_t num_tasks() const = 0;
  virtual std::size_t num_params() const = 0;
  virtual std::size_t num_shared_params() const = 0;
  virtual Eigen::VectorXd initial_params() const = 0;

  /// Training losses and gradients at `params`. Stochastic problems draw
  /// their minibatch from `iter`, so a given (params, iter) pair always
  /// yields the same result.
  virtual void evaluate(const Eigen::VectorXd& params, std::uint64_t iter,
                        TaskEvaluation& out) const = 0;

  /// Noise-free per-task losses used for scoring a trained model.
  virtual std::vector<double> task_losses(const Eigen::VectorXd& params) const = 0;

  /// Gradient descent step size h, shared by every method on this problem.
  virtual double step_size() const = 0;

  /// Known single-task optimum losses B_k, if the family has them in closed
  /// form.
  virtual std::optional<std::vector<double>> reference_optima() const { return std::nullopt; }

  virtual std::string describe() const = 0;
};

}  // namespace autoscale
