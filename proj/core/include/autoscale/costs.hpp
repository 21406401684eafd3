// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string_view>

#include "autoscale/snapshot.hpp"
#include "autoscale/weights.hpp"

namespace autoscale {

/// Window cost functions F(w) used to select weights.
enum class CostKind {
  EqualGradNorm,       ///< balance the weighted gradient magnitudes w_k |g_k|
  EqualLoss,           ///< balance the weighted losses w_k l_k
  LowConditionNumber,  ///< minimize kappa([w_1 g_1 ... w_K g_K])
};

/// "equal-grad", "equal-loss" or "low-cond".
std::string_view to_string(CostKind kind);
/// Inverse of to_string; throws InvalidArgument for unknown names.
CostKind parse_cost_kind(std::string_view name);

/// Least-squares kinds have window costs that are exact quadratics in w.
constexpr bool is_quadratic(CostKind kind) { return kind != CostKind::LowConditionNumber; }

/// The K(K-1)/2 x K pair-difference matrix A of a magnitude vector m.
/// Row r belongs to the pair (i, j), i < j, in lexicographic order and holds
/// +m_i in column i and -m_j in column j, so (A w)_r = w_i m_i - w_j m_j.
class PairDifferenceMatrix {
 public:
  explicit PairDifferenceMatrix(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {}

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  Eigen::Index rows() const { return matrix_.rows(); }
  Eigen::Index cols() const { return matrix_.cols(); }
  double operator()(Eigen::Index r, Eigen::Index c) const { return matrix_(r, c); }

  /// Row index of pair (i, j) with i < j among K tasks.
  static Eigen::Index row_of(std::size_t i, std::size_t j, std::size_t num_tasks);

 private:
  Eigen::MatrixXd matrix_;
};

/// Throws InvalidArgument for fewer than two magnitudes.
PairDifferenceMatrix build_pair_matrix(std::span<const double> magnitudes);

/// True when the per-iteration cost of `kind` carries no information for
/// this entry: all gradient norms zero (EqualGradNorm, LowConditionNumber)
/// or all losses zero (EqualLoss).
bool is_degenerate(CostKind kind, const WindowEntry& entry);

/// F^t(w). EqualGradNorm: ||A(|g|) w||^2. EqualLoss: ||A(l) w||^2.
/// LowConditionNumber: kappa(G diag(w)), with the smallest eigenvalue floored.
/// Throws DegenerateInput for an all-zero Gram matrix under LowConditionNumber.
double cost_per_iteration(CostKind kind, const WeightVector& w, const GradientSnapshot& grad,
                          const LossSnapshot& loss);

/// Same for an arbitrary positive weight array (used inside the solvers).
double cost_per_iteration(CostKind kind, std::span<const double> w, const WindowEntry& entry);

struct WindowCost {
  double value = 0.0;
  std::size_t used = 0;     ///< snapshots that entered the mean
  std::size_t skipped = 0;  ///< degenerate snapshots left out
};

/// Mean of cost_per_iteration over the non-degenerate snapshots of the
/// window. Throws InvalidArgument for an empty window and DegenerateInput
/// when every snapshot is degenerate.
WindowCost window_cost_detail(CostKind kind, std::span<const double> w,
                              const WindowBuffer& window);

double window_cost(CostKind kind, const WeightVector& w, const WindowBuffer& window);

/// M with window_cost(kind, w) = w^T M w for the least-squares kinds:
/// M = (1/n) sum_t A_t^T A_t over the n non-degenerate snapshots.
/// Throws InvalidArgument for LowConditionNumber.
Eigen::MatrixXd quadratic_form(CostKind kind, const WindowBuffer& window);

}  // namespace autoscale
