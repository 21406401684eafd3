// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "autoscale/snapshot.hpp"
#include "autoscale/weights.hpp"

namespace autoscale {

/// Relative floor on the smallest Gram eigenvalue; keeps the condition
/// number finite (at most 1e6) for rank-deficient gradient sets.
inline constexpr double kEigenvalueFloor = 1e-12;

/// 2|g_i||g_j| / (|g_i|^2 + |g_j|^2), in [0, 1]. 1 means equal magnitudes,
/// 0 means one task's gradient vanishes. Throws DegenerateInput when both
/// norms are zero.
double grad_magnitude_similarity(const GradientSnapshot& snapshot, std::size_t i, std::size_t j);

/// Cosine of the angle between g_i and g_j, clamped to [-1, 1]. Throws
/// DegenerateInput if either gradient is zero.
double grad_cosine_similarity(const GradientSnapshot& snapshot, std::size_t i, std::size_t j);

struct ConditionNumber {
  double value = 1.0;
  /// The smallest eigenvalue was raised to kEigenvalueFloor * lambda_max.
  bool floored = false;
};

/// sigma_max / sigma_min of the gradient matrix, from the eigenvalues of the
/// Gram matrix (optionally of G diag(w)). Throws DegenerateInput when every
/// gradient is zero.
ConditionNumber condition_number_detail(const GradientSnapshot& snapshot);
ConditionNumber condition_number_detail(const GradientSnapshot& snapshot,
                                        std::span<const double> weights);

double condition_number(const GradientSnapshot& snapshot);
double condition_number(const GradientSnapshot& snapshot, const WeightVector& weights);

/// Per-task l_k^t / l_k^0.
std::vector<double> inverse_learning_rate(const LossSnapshot& snapshot);

/// Per-task l_k^t / l_k^{t-1}. Throws InvalidArgument if a previous loss is
/// not positive.
std::vector<double> loss_descending_rate(const LossSnapshot& snapshot);

/// Each task's share l_k / sum_j l_j; sums to 1. Throws DegenerateInput on
/// a zero total.
std::vector<double> relative_loss(std::span<const double> losses);
std::vector<double> relative_loss(const LossSnapshot& snapshot);

using PairMetric = std::function<double(const GradientSnapshot&, std::size_t, std::size_t)>;

/// Unweighted mean of `metric` over all K(K-1)/2 unordered task pairs.
/// Errors from individual pairs propagate.
double pairwise_mean(const PairMetric& metric, const GradientSnapshot& snapshot);

struct PairwiseSummary {
  double mean = 0.0;  // NaN when every pair was degenerate
  std::size_t used = 0;
  std::size_t skipped = 0;
};

/// Like pairwise_mean but skips pairs that raise DegenerateInput.
PairwiseSummary pairwise_mean_skipping(const PairMetric& metric, const GradientSnapshot& snapshot);

/// Population standard deviation (divisor K).
double task_std(std::span<const double> values);

/// Bits of MetricRecord::degenerate_flags.
enum DegenerateFlag : std::uint32_t {
  kGmsPairSkipped = 1u << 0,
  kGcsPairSkipped = 1u << 1,
  kConditionFloored = 1u << 2,
  kConditionUndefined = 1u << 3,
  kRelativeLossUndefined = 1u << 4,
  kDescendingRateUndefined = 1u << 5,
};

/// One iteration's metric values.
///
/// GMS, GCS and the condition number are evaluated on the weighted
/// gradients w_k g_k and the relative loss on the weighted losses w_k l_k,
/// i.e. on the per-task contributions to the scalarized objective that is
/// actually being trained. ILR and LDR are loss ratios and use the raw
/// losses. Undefined aggregates are NaN with the matching flag set.
struct MetricRecord {
  std::uint64_t iter = 0;
  double gms_mean = 0.0;
  double gcs_mean = 0.0;
  double cond_number = 1.0;
  std::vector<double> ilr_per_task;
  double ilr_std = 0.0;
  std::vector<double> ldr_per_task;
  std::vector<double> rl_per_task;
  double rl_std = 0.0;
  std::vector<double> weights;
  std::uint32_t degenerate_flags = 0;

  bool operator==(const MetricRecord&) const = default;
};

/// Computes every field of a MetricRecord. Throws InvalidArgument when the
/// snapshots disagree on the iteration or task count.
MetricRecord metric_record(const GradientSnapshot& grad, const LossSnapshot& loss,
                           const WeightVector& weights);

}  // namespace autoscale
