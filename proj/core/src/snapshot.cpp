// SPDX-License-Identifier: Apache-2.0
#include "autoscale/snapshot.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "autoscale/error.hpp"

namespace autoscale {
namespace {

constexpr double kSymmetryTolerance = 1e-10;
constexpr double kDiagonalTolerance = 1e-8;

void check_gram(const Eigen::MatrixXd& gram) {
  if (gram.rows() != gram.cols() || gram.rows() == 0) {
    throw InvalidArgument("Gram matrix must be square and non-empty");
  }
  if (!gram.allFinite()) throw InvalidArgument("Gram matrix has non-finite entries");
  const double scale = std::max(gram.cwiseAbs().maxCoeff(), 1e-300);
  const auto k = gram.rows();
  for (Eigen::Index i = 0; i < k; ++i) {
    if (gram(i, i) < 0.0) throw InvalidArgument("Gram matrix has a negative diagonal entry");
    for (Eigen::Index j = i + 1; j < k; ++j) {
      if (std::abs(gram(i, j) - gram(j, i)) > kSymmetryTolerance * scale) {
        throw InvalidArgument("Gram matrix is not symmetric");
      }
      const double bound = std::sqrt(gram(i, i) * gram(j, j));
      if (std::abs(gram(i, j)) > bound * (1.0 + 1e-10) + 1e-300) {
        throw InvalidArgument("Gram matrix violates Cauchy-Schwarz at (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")");
      }
    }
  }
}

void check_losses(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + " contain a non-finite value");
  }
}

}  // namespace

GradientSnapshot GradientSnapshot::from_gram(Eigen::MatrixXd gram, std::uint64_t iter) {
  check_gram(gram);
  std::vector<double> norms(static_cast<std::size_t>(gram.rows()));
  for (Eigen::Index i = 0; i < gram.rows(); ++i) norms[i] = std::sqrt(gram(i, i));
  return GradientSnapshot(std::move(norms), std::move(gram), iter);
}

GradientSnapshot GradientSnapshot::from_parts(std::vector<double> norms, Eigen::MatrixXd gram,
                                              std::uint64_t iter) {
  check_gram(gram);
  if (norms.size() != static_cast<std::size_t>(gram.rows())) {
    throw InvalidArgument("norm count does not match Gram matrix size");
  }
  for (std::size_t i = 0; i < norms.size(); ++i) {
    const double sq = norms[i] * norms[i];
    const double diag = gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    if (!(norms[i] >= 0.0) || std::abs(sq - diag) > kDiagonalTolerance * std::max(sq, diag)) {
      throw InvalidArgument("norm " + std::to_string(i) + " disagrees with the Gram diagonal");
    }
  }
  return GradientSnapshot(std::move(norms), std::move(gram), iter);
}

GradientSnapshot GradientSnapshot::scaled(std::span<const double> weights) const {
  if (weights.size() != norms_.size()) {
    throw InvalidArgument("weight count does not match task count");
  }
  const auto k = static_cast<Eigen::Index>(weights.size());
  Eigen::MatrixXd gram(k, k);
  std::vector<double> norms(weights.size());
  for (Eigen::Index i = 0; i < k; ++i) {
    norms[i] = std::abs(weights[i]) * norms_[i];
    for (Eigen::Index j = 0; j < k; ++j) gram(i, j) = weights[i] * weights[j] * gram_(i, j);
  }
  return GradientSnapshot(std::move(norms), std::move(gram), iter_);
}

GradientSnapshot snapshot_from_gradients(const Eigen::Ref<const Eigen::MatrixXd>& gradients,
                                         std::uint64_t iter) {
  if (gradients.rows() == 0 || gradients.cols() == 0) {
    throw InvalidArgument("gradient matrix must have at least one row and one column");
  }
  if (!gradients.allFinite()) throw InvalidArgument("gradients contain non-finite values");
  Eigen::MatrixXd gram = gradients.transpose() * gradients;
  gram = 0.5 * (gram + gram.transpose()).eval();
  std::vector<double> norms(static_cast<std::size_t>(gradients.cols()));
  for (Eigen::Index k = 0; k < gradients.cols(); ++k) norms[k] = std::sqrt(gram(k, k));
  return GradientSnapshot::from_parts(std::move(norms), std::move(gram), iter);
}

GradientSnapshot snapshot_from_gradients(std::span<const std::vector<double>> task_gradients,
                                         std::uint64_t iter) {
  if (task_gradients.empty()) throw InvalidArgument("no task gradients supplied");
  const auto dim = task_gradients.front().size();
  for (const auto& g : task_gradients) {
    if (g.size() != dim) throw InvalidArgument("task gradients differ in dimension");
  }
  Eigen::MatrixXd stacked(static_cast<Eigen::Index>(dim),
                          static_cast<Eigen::Index>(task_gradients.size()));
  for (std::size_t k = 0; k < task_gradients.size(); ++k) {
    stacked.col(static_cast<Eigen::Index>(k)) =
        Eigen::Map<const Eigen::VectorXd>(task_gradients[k].data(), static_cast<Eigen::Index>(dim));
  }
  return snapshot_from_gradients(stacked, iter);
}

LossSnapshot::LossSnapshot(std::vector<double> losses, std::vector<double> initial_losses,
                           std::vector<double> prev_losses, std::uint64_t iter)
    : losses_(std::move(losses)),
      initial_(std::move(initial_losses)),
      prev_(std::move(prev_losses)),
      iter_(iter) {
  if (losses_.empty()) throw InvalidArgument("loss snapshot needs at least one task");
  if (initial_.size() != losses_.size() || prev_.size() != losses_.size()) {
    throw InvalidArgument("loss arrays differ in length");
  }
  check_losses(losses_, "losses");
  check_losses(initial_, "initial losses");
  check_losses(prev_, "previous losses");
  for (double l : losses_) {
    if (l < 0.0) throw InvalidArgument("task losses must be nonnegative");
  }
  for (double l : initial_) {
    if (l <= 0.0) throw InvalidArgument("initial task losses must be strictly positive");
  }
}

LossSnapshot LossSnapshot::first(std::vector<double> losses, std::uint64_t iter) {
  auto initial = losses;
  auto prev = losses;
  return LossSnapshot(std::move(losses), std::move(initial), std::move(prev), iter);
}

WindowBuffer::WindowBuffer(std::size_t capacity, std::uint64_t stride)
    : capacity_(capacity), stride_(stride) {
  if (capacity == 0) throw InvalidArgument("window capacity must be positive");
  if (stride == 0) throw InvalidArgument("window stride must be positive");
  entries_.reserve(capacity);
}

void WindowBuffer::push(GradientSnapshot grad, LossSnapshot loss) {
  if (full()) throw InvalidArgument("window buffer is full");
  if (grad.iter() != loss.iter()) {
    throw InvalidArgument("gradient and loss snapshots come from different iterations");
  }
  if (grad.num_tasks() != loss.num_tasks()) {
    throw InvalidArgument("gradient and loss snapshots disagree on the task count");
  }
  if (!entries_.empty()) {
    const auto& last = entries_.back();
    if (grad.num_tasks() != last.grad.num_tasks()) {
      throw InvalidArgument("task count changed within a window");
    }
    if (grad.iter() != last.grad.iter() + stride_) {
      throw InvalidArgument("window iterations must be contiguous: expected " +
                            std::to_string(last.grad.iter() + stride_) + ", got " +
                            std::to_string(grad.iter()));
    }
  }
  entries_.push_back({std::move(grad), std::move(loss)});
}

}  // namespace autoscale
