// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "autoscale/problem.hpp"

namespace autoscale {

/// l_k(theta) = s_k * 0.5 (theta - c_k)^T Q_k (theta - c_k) + b_k.
struct QuadraticTask {
  Eigen::MatrixXd curvature;  ///< Q_k, symmetric positive semidefinite
  Eigen::VectorXd center;     ///< c_k
  double scale = 1.0;         ///< s_k > 0
  double offset = 0.0;        ///< b_k >= 0, the single-task optimum
};

/// Quadratic tasks sharing every parameter.
///
/// With gradient_noise = nu > 0, training iteration t sees the minibatch loss
/// s_k * 0.5 (theta - c_k - xi)^T Q_k (theta - c_k - xi) + b_k with
/// xi ~ N(0, nu^2 I) drawn from (seed, t, k). Scoring always uses the
/// noise-free loss.
class QuadraticProblem : public MultiTaskProblem {
 public:
  /// Throws InvalidArgument on inconsistent dimensions, non-positive scales,
  /// negative offsets, non-positive step size or negative noise.
  QuadraticProblem(std::vector<QuadraticTask> tasks, Eigen::VectorXd initial, double step_size,
                   double gradient_noise = 0.0, std::uint64_t seed = 0);

  std::size_t num_tasks() const override { return tasks_.size(); }
  std::size_t num_params() const override { return static_cast<std::size_t>(initial_.size()); }
  std::size_t num_shared_params() const override { return num_params(); }
  Eigen::VectorXd initial_params() const override { return initial_; }
  void evaluate(const Eigen::VectorXd& params, std::uint64_t iter,
                TaskEvaluation& out) const override;
  std::vector<double> task_losses(const Eigen::VectorXd& params) const override;
  double step_size() const override { return step_size_; }
  std::optional<std::vector<double>> reference_optima() const override;
  std::string describe() const override;

  const std::vector<QuadraticTask>& tasks() const { return tasks_; }
  double gradient_noise() const { return noise_; }

  /// Minimizer of sum_k w_k l_k, i.e. (sum w_k s_k Q_k)^-1 sum w_k s_k Q_k c_k.
  Eigen::VectorXd scalarized_optimum(std::span<const double> weights) const;

 private:
  std::vector<QuadraticTask> tasks_;
  Eigen::VectorXd initial_;
  double step_size_;
  double noise_;
  std::uint64_t seed_;
};

struct QuadraticOptions {
  double radius = 1.0;           ///< |c_k - theta_0|
  std::vector<double> offsets;   ///< b_k; empty means b_k = s_k
  double step_size = 0.0;        ///< 0 picks 0.5 / (K max_k s_k)
  double gradient_noise = 0.0;
};

/// Identity-curvature tasks whose gradients at theta_0 = 0 have norms
/// proportional to `scales` and meet pairwise at `conflict_angle`.
/// Throws InvalidArgument for K < 2, D < K, an angle outside [0, pi], or an
/// angle whose cosine is below -1/(K-1) (no K unit vectors can be that
/// far apart pairwise).
std::unique_ptr<QuadraticProblem> make_quadratic_problem(std::size_t num_tasks, std::size_t dim,
                                                         std::span<const double> scales,
                                                         double conflict_angle, std::uint64_t seed,
                                                         const QuadraticOptions& options = {});

/// The imbalanced three-task instance used for trend and method
/// comparisons: D = 16, scales (1, 4, 16), orthogonal task directions,
/// offsets b_k = s_k, minibatch noise 0.3 and step size 0.01.
std::unique_ptr<QuadraticProblem> make_reference_problem(std::uint64_t seed = 2024);

}  // namespace autoscale
