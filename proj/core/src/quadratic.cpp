// SPDX-License-Identifier: Apache-2.0
#include "autoscale/quadratic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "autoscale/error.hpp"
#include "autoscale/random.hpp"

namespace autoscale {

QuadraticProblem::QuadraticProblem(std::vector<QuadraticTask> tasks, Eigen::VectorXd initial,
                                   double step_size, double gradient_noise, std::uint64_t seed)
    : tasks_(std::move(tasks)),
      initial_(std::move(initial)),
      step_size_(step_size),
      noise_(gradient_noise),
      seed_(seed) {
  if (tasks_.empty()) throw InvalidArgument("quadratic problem needs at least one task");
  const auto d = initial_.size();
  if (d == 0) throw InvalidArgument("quadratic problem needs at least one parameter");
  for (const auto& t : tasks_) {
    if (t.curvature.rows() != d || t.curvature.cols() != d || t.center.size() != d) {
      throw InvalidArgument("quadratic task dimensions do not match the parameter vector");
    }
    if (!(t.scale > 0.0)) throw InvalidArgument("quadratic task scale must be positive");
    if (!(t.offset >= 0.0)) throw InvalidArgument("quadratic task offset must be nonnegative");
  }
  if (!(step_size_ > 0.0)) throw InvalidArgument("step size must be positive");
  if (!(noise_ >= 0.0)) throw InvalidArgument("gradient noise must be nonnegative");
}

void QuadraticProblem::evaluate(const Eigen::VectorXd& params, std::uint64_t iter,
                                TaskEvaluation& out) const {
  const auto k = tasks_.size();
  const auto d = initial_.size();
  out.losses.resize(k);
  out.gradients.resize(d, static_cast<Eigen::Index>(k));

  Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(d, static_cast<Eigen::Index>(k));
  if (noise_ > 0.0) {
    auto rng = make_rng(seed_, SeedStream::GradientNoise, iter);
    std::normal_distribution<double> normal(0.0, noise_);
    for (Eigen::Index c = 0; c < noise.cols(); ++c) {
      for (Eigen::Index r = 0; r < d; ++r) noise(r, c) = normal(rng);
    }
  }
  for (std::size_t t = 0; t < k; ++t) {
    const auto& task = tasks_[t];
    const Eigen::VectorXd diff = params - task.center - noise.col(static_cast<Eigen::Index>(t));
    const Eigen::VectorXd qd = task.curvature * diff;
    out.losses[t] = task.scale * 0.5 * diff.dot(qd) + task.offset;
    out.gradients.col(static_cast<Eigen::Index>(t)) = task.scale * qd;
  }
}

std::vector<double> QuadraticProblem::task_losses(const Eigen::VectorXd& params) const {
  std::vector<double> out(tasks_.size());
  for (std::size_t t = 0; t < tasks_.size(); ++t) {
    const auto& task = tasks_[t];
    const Eigen::VectorXd diff = params - task.center;
    out[t] = task.scale * 0.5 * diff.dot(task.curvature * diff) + task.offset;
  }
  return out;
}

std::optional<std::vector<double>> QuadraticProblem::reference_optima() const {
  std::vector<double> out;
  for (const auto& t : tasks_) out.push_back(t.offset);
  return out;
}

std::string QuadraticProblem::describe() const {
  std::ostringstream os;
  os << "quadratic(K=" << tasks_.size() << ", D=" << initial_.size() << ", noise=" << noise_
     << ", h=" << step_size_ << ")";
  return os.str();
}

Eigen::VectorXd QuadraticProblem::scalarized_optimum(std::span<const double> weights) const {
  if (weights.size() != tasks_.size()) throw InvalidArgument("weight count does not match task count");
  const auto d = initial_.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  for (std::size_t t = 0; t < tasks_.size(); ++t) {
    const double a = weights[t] * tasks_[t].scale;
    h += a * tasks_[t].curvature;
    rhs += a * (tasks_[t].curvature * tasks_[t].center);
  }
  return h.ldlt().solve(rhs);
}

std::unique_ptr<QuadraticProblem> make_quadratic_problem(std::size_t num_tasks, std::size_t dim,
                                                         std::span<const double> scales,
                                                         double conflict_angle, std::uint64_t seed,
                                                         const QuadraticOptions& options) {
  const auto k = num_tasks;
  if (k < 2) throw InvalidArgument("quadratic problem needs at least two tasks");
  if (dim < k) throw InvalidArgument("dimension must be at least the number of tasks");
  if (scales.size() != k) throw InvalidArgument("need one scale per task");
  if (!(conflict_angle >= 0.0 && conflict_angle <= std::numbers::pi)) {
    throw InvalidArgument("conflict angle must lie in [0, pi]");
  }
  const double c = std::cos(conflict_angle);
  if (c < -1.0 / static_cast<double>(k - 1) - 1e-12) {
    throw InvalidArgument("no " + std::to_string(k) +
                          " directions can meet pairwise at this conflict angle");
  }
  if (!options.offsets.empty() && options.offsets.size() != k) {
    throw InvalidArgument("need one offset per task");
  }

  // Unit directions with pairwise cosine c: factor (1-c) I + c 11^T.
  const auto ki = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd cosines = Eigen::MatrixXd::Constant(ki, ki, c);
  cosines.diagonal().setOnes();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cosines);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd directions = root.asDiagonal() * eig.eigenvectors().transpose();  // K x K

  // Random orthonormal embedding of R^K into R^D.
  auto rng = make_rng(seed, SeedStream::ProblemInit);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd gauss(d, ki);
  for (Eigen::Index col = 0; col < ki; ++col) {
    for (Eigen::Index row = 0; row < d; ++row) gauss(row, col) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  const Eigen::MatrixXd embed = qr.householderQ() * Eigen::MatrixXd::Identity(d, ki);

  double max_scale = 0.0;
  std::vector<QuadraticTask> tasks(k);
  for (std::size_t t = 0; t < k; ++t) {
    if (!(scales[t] > 0.0)) throw InvalidArgument("scales must be positive");
    max_scale = std::max(max_scale, scales[t]);
    auto& task = tasks[t];
    task.curvature = Eigen::MatrixXd::Identity(d, d);
    // The gradient at theta_0 = 0 is -s_k c_k, so centers sit along the
    // chosen directions at distance `radius`.
    task.center = options.radius * (embed * directions.col(static_cast<Eigen::Index>(t)));
    task.scale = scales[t];
    task.offset = options.offsets.empty() ? scales[t] : options.offsets[t];
  }
  const double step = options.step_size > 0.0
                          ? options.step_size
                          : 0.5 / (static_cast<double>(k) * max_scale);
  return std::make_unique<QuadraticProblem>(std::move(tasks), Eigen::VectorXd::Zero(d), step,
                                            options.gradient_noise, seed);
}

std::unique_ptr<QuadraticProblem> make_reference_problem(std::uint64_t seed) {
  const std::vector<double> scales{1.0, 4.0, 16.0};
  QuadraticOptions options;
  options.gradient_noise = 0.3;
  options.step_size = 0.01;
  return make_quadratic_problem(3, 16, scales, std::numbers::pi / 2.0, seed, options);
}

}  // namespace autoscale
