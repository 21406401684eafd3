// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

namespace autoscale {

/// A task metric of a multi-task model next to its single-task baseline.
struct TaskScore {
  double value = 0.0;             ///< M_k
  double baseline = 1.0;          ///< B_k, nonzero
  bool higher_is_better = false;  ///< sigma_k
};

/// Signed relative change (-1)^sigma_k (M_k - B_k) / B_k * 100. Positive
/// means the task got worse. Throws InvalidArgument for a zero baseline.
double signed_task_drop(const TaskScore& score);

/// Mean signed drop over tasks, in percent; lower is better.
double delta_m(std::span<const TaskScore> scores);

/// Sum (not mean) of the positive signed drops, in percent.
double delta_m_deg(std::span<const TaskScore> scores);

/// Ranks 1..n with rank 1 for the smallest value; tied values share the
/// average of their ranks.
std::vector<double> average_ranks(std::span<const double> values);

/// Mean over tasks of each method's rank among all methods (rank 1 = best,
/// ties averaged). `scores[m][t]` is method m on task t. Throws
/// InvalidArgument for fewer than two methods or ragged input.
std::vector<double> mean_rank(const std::vector<std::vector<double>>& scores,
                              const std::vector<bool>& higher_is_better);

/// Spearman rank correlation with average ranks for ties. Throws
/// InvalidArgument for length mismatch, fewer than three points or a
/// constant input.
double spearman_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace autoscale
