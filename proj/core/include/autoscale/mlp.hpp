// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <memory>

#include "autoscale/problem.hpp"

namespace autoscale {

struct MlpOptions {
  std::size_t teacher_width = 4;
  double step_size = 0.2;
};

/// Shared one-hidden-layer tanh trunk with a linear head per task, trained
/// on synthetic regression data with mean squared error
/// l_k = 1/(2n) sum_i (y_k(x_i) - t_k(x_i))^2.
///
/// Targets come from a random tanh teacher of width `teacher_width` plus
/// Gaussian noise sigma. Parameter layout: trunk weights W1 (width x input,
/// row-major) and bias b1 form the shared block; each task then owns its
/// head weights v_k (width) and bias c_k.
class MlpProblem : public MultiTaskProblem {
 public:
  MlpProblem(std::size_t num_tasks, std::size_t input_dim, std::size_t width,
             std::size_t samples, double noise, std::uint64_t seed, const MlpOptions& options = {});

  std::size_t num_tasks() const override { return num_tasks_; }
  std::size_t num_params() const override;
  std::size_t num_shared_params() const override { return width_ * input_dim_ + width_; }
  Eigen::VectorXd initial_params() const override { return initial_; }
  void evaluate(const Eigen::VectorXd& params, std::uint64_t iter,
                TaskEvaluation& out) const override;
  std::vector<double> task_losses(const Eigen::VectorXd& params) const override;
  double step_size() const override { return step_size_; }
  std::string describe() const override;

  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::MatrixXd& targets() const { return targets_; }

 private:
  std::size_t head_offset(std::size_t task) const;

  std::size_t num_tasks_;
  std::size_t input_dim_;
  std::size_t width_;
  double step_size_;
  Eigen::MatrixXd inputs_;   // samples x input_dim
  Eigen::MatrixXd targets_;  // samples x num_tasks
  Eigen::VectorXd initial_;
};

/// Throws InvalidArgument if any size is zero or noise is negative.
std::unique_ptr<MlpProblem> make_mlp_problem(std::size_t num_tasks, std::size_t input_dim,
                                             std::size_t width, std::size_t samples, double noise,
                                             std::uint64_t seed, const MlpOptions& options = {});

}  // namespace autoscale
