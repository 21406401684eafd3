// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace autoscale {

/// Per-iteration task-gradient information, stored as per-task norms plus the
/// K x K Gram matrix G^T G of the unweighted shared-parameter gradients.
/// Every metric and cost in the library depends on the gradients only
/// through inner products, so the full D x K matrix is never kept.
class GradientSnapshot {
 public:
  GradientSnapshot() = default;

  /// Builds a snapshot from an explicit Gram matrix; norms are sqrt(diag).
  /// Throws InvalidArgument unless the matrix is square, K >= 1, finite,
  /// symmetric within 1e-10 relative and satisfies Cauchy-Schwarz.
  static GradientSnapshot from_gram(Eigen::MatrixXd gram, std::uint64_t iter);

  /// As from_gram, with explicitly supplied norms (e.g. parsed from a trace)
  /// that must agree with the diagonal within 1e-8 relative.
  static GradientSnapshot from_parts(std::vector<double> norms, Eigen::MatrixXd gram,
                                     std::uint64_t iter);

  std::size_t num_tasks() const { return norms_.size(); }
  std::span<const double> norms() const { return norms_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  std::uint64_t iter() const { return iter_; }

  /// Snapshot of the scaled gradients (w_1 g_1, ..., w_K g_K).
  GradientSnapshot scaled(std::span<const double> weights) const;

 private:
  GradientSnapshot(std::vector<double> norms, Eigen::MatrixXd gram, std::uint64_t iter)
      : norms_(std::move(norms)), gram_(std::move(gram)), iter_(iter) {}

  std::vector<double> norms_;
  Eigen::MatrixXd gram_;
  std::uint64_t iter_ = 0;
};

/// Compresses the columns of `gradients` (D x K, one task per column) into a
/// snapshot. Throws InvalidArgument when D == 0 or K == 0.
GradientSnapshot snapshot_from_gradients(const Eigen::Ref<const Eigen::MatrixXd>& gradients,
                                         std::uint64_t iter = 0);

/// Overload for separately stored task gradients; all must share one
/// dimension.
GradientSnapshot snapshot_from_gradients(std::span<const std::vector<double>> task_gradients,
                                         std::uint64_t iter = 0);

/// Task losses at one iteration together with the initial and previous
/// losses needed by the rate metrics.
class LossSnapshot {
 public:
  LossSnapshot() = default;

  /// Throws InvalidArgument on length mismatch, negative or non-finite
  /// losses, or a non-positive initial loss.
  LossSnapshot(std::vector<double> losses, std::vector<double> initial_losses,
               std::vector<double> prev_losses, std::uint64_t iter);

  /// Snapshot for the first iteration: initial and previous losses are the
  /// current ones.
  static LossSnapshot first(std::vector<double> losses, std::uint64_t iter = 0);

  std::size_t num_tasks() const { return losses_.size(); }
  std::span<const double> losses() const { return losses_; }
  std::span<const double> initial_losses() const { return initial_; }
  std::span<const double> prev_losses() const { return prev_; }
  std::uint64_t iter() const { return iter_; }

 private:
  std::vector<double> losses_;
  std::vector<double> initial_;
  std::vector<double> prev_;
  std::uint64_t iter_ = 0;
};

struct WindowEntry {
  GradientSnapshot grad;
  LossSnapshot loss;
};

/// Up to `capacity` consecutive snapshot pairs over which a window cost is
/// averaged. Iterations must advance by exactly `stride` between pushes.
class WindowBuffer {
 public:
  explicit WindowBuffer(std::size_t capacity, std::uint64_t stride = 1);

  /// Throws InvalidArgument when full, when the two snapshots disagree on
  /// the iteration or task count, or when the iteration does not continue
  /// the sequence.
  void push(GradientSnapshot grad, LossSnapshot loss);
  void clear() { entries_.clear(); }

  std::size_t capacity() const { return capacity_; }
  std::uint64_t stride() const { return stride_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool full() const { return entries_.size() == capacity_; }
  std::size_t num_tasks() const { return entries_.empty() ? 0 : entries_.front().grad.num_tasks(); }

  std::span<const WindowEntry> entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::size_t capacity_;
  std::uint64_t stride_;
  std::vector<WindowEntry> entries_;
};

}  // namespace autoscale
