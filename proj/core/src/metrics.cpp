// SPDX-License-Identifier: Apache-2.0
#include "autoscale/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "autoscale/error.hpp"
#include "autoscale/linalg.hpp"

namespace autoscale {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kEqualNormTolerance = 1e-12;

void check_pair(const GradientSnapshot& s, std::size_t i, std::size_t j) {
  if (i >= s.num_tasks() || j >= s.num_tasks()) throw InvalidArgument("task index out of range");
  if (i == j) throw InvalidArgument("pair metrics need two distinct tasks");
}

ConditionNumber condition_from_gram(const Eigen::MatrixXd& gram) {
  if (gram.cwiseAbs().maxCoeff() == 0.0) {
    throw DegenerateInput("condition number of an all-zero gradient matrix is undefined");
  }
  const Eigen::VectorXd eig = symmetric_eigenvalues(gram);
  const double lambda_max = eig(eig.size() - 1);
  const double floor = kEigenvalueFloor * lambda_max;
  ConditionNumber out;
  double lambda_min = eig(0);
  if (lambda_min < floor) {
    lambda_min = floor;
    out.floored = true;
  }
  out.value = std::max(1.0, std::sqrt(lambda_max / lambda_min));
  return out;
}

}  // namespace

double grad_magnitude_similarity(const GradientSnapshot& snapshot, std::size_t i, std::size_t j) {
  check_pair(snapshot, i, j);
  const double a = snapshot.norms()[i];
  const double b = snapshot.norms()[j];
  if (a == 0.0 && b == 0.0) {
    throw DegenerateInput("magnitude similarity of two zero gradients is undefined");
  }
  // 2xy / (x^2 + y^2) = 1 - (x - y)^2 / (x^2 + y^2), scaled by the larger
  // norm so the squares cannot overflow. Exactly 1 only for numerically equal
  // norms; otherwise at most the largest double below 1.
  const double hi = std::max(a, b);
  const double x = a / hi;
  const double y = b / hi;
  if (std::abs(x - y) <= kEqualNormTolerance) return 1.0;
  const double value = 1.0 - (x - y) * (x - y) / (x * x + y * y);
  return std::clamp(value, 0.0, std::nextafter(1.0, 0.0));
}

double grad_cosine_similarity(const GradientSnapshot& snapshot, std::size_t i, std::size_t j) {
  check_pair(snapshot, i, j);
  const double a = snapshot.norms()[i];
  const double b = snapshot.norms()[j];
  if (a == 0.0 || b == 0.0) throw DegenerateInput("cosine similarity with a zero gradient");
  const double c = snapshot.gram()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) /
                   (a * b);
  return std::clamp(c, -1.0, 1.0);
}

ConditionNumber condition_number_detail(const GradientSnapshot& snapshot) {
  return condition_from_gram(snapshot.gram());
}

ConditionNumber condition_number_detail(const GradientSnapshot& snapshot,
                                        std::span<const double> weights) {
  if (weights.size() != snapshot.num_tasks()) {
    throw InvalidArgument("weight count does not match task count");
  }
  const auto k = static_cast<Eigen::Index>(weights.size());
  Eigen::MatrixXd gram(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      gram(i, j) = weights[i] * weights[j] * snapshot.gram()(i, j);
    }
  }
  return condition_from_gram(gram);
}

double condition_number(const GradientSnapshot& snapshot) {
  return condition_number_detail(snapshot).value;
}

double condition_number(const GradientSnapshot& snapshot, const WeightVector& weights) {
  return condition_number_detail(snapshot, weights.values()).value;
}

std::vector<double> inverse_learning_rate(const LossSnapshot& snapshot) {
  std::vector<double> out(snapshot.num_tasks());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = snapshot.losses()[k] / snapshot.initial_losses()[k];
  }
  return out;
}

std::vector<double> loss_descending_rate(const LossSnapshot& snapshot) {
  std::vector<double> out(snapshot.num_tasks());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double prev = snapshot.prev_losses()[k];
    if (!(prev > 0.0)) {
      throw InvalidArgument("loss descending rate needs a positive previous loss for task " +
                            std::to_string(k));
    }
    out[k] = snapshot.losses()[k] / prev;
  }
  return out;
}

std::vector<double> relative_loss(std::span<const double> losses) {
  double total = 0.0;
  for (double l : losses) {
    if (l < 0.0 || !std::isfinite(l)) throw InvalidArgument("losses must be finite and nonnegative");
    total += l;
  }
  if (!(total > 0.0)) throw DegenerateInput("relative loss of a zero total loss is undefined");
  std::vector<double> out(losses.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = losses[k] / total;
  return out;
}

std::vector<double> relative_loss(const LossSnapshot& snapshot) {
  return relative_loss(snapshot.losses());
}

double pairwise_mean(const PairMetric& metric, const GradientSnapshot& snapshot) {
  const auto k = snapshot.num_tasks();
  if (k < 2) throw InvalidArgument("pairwise mean needs at least two tasks");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      sum += metric(snapshot, i, j);
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

PairwiseSummary pairwise_mean_skipping(const PairMetric& metric,
                                       const GradientSnapshot& snapshot) {
  const auto k = snapshot.num_tasks();
  if (k < 2) throw InvalidArgument("pairwise mean needs at least two tasks");
  PairwiseSummary out;
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      try {
        sum += metric(snapshot, i, j);
        ++out.used;
      } catch (const DegenerateInput&) {
        ++out.skipped;
      }
    }
  }
  out.mean = out.used > 0 ? sum / static_cast<double>(out.used) : kNaN;
  return out;
}

double task_std(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("standard deviation of an empty set");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / n);
}

MetricRecord metric_record(const GradientSnapshot& grad, const LossSnapshot& loss,
                           const WeightVector& weights) {
  if (grad.iter() != loss.iter()) {
    throw InvalidArgument("gradient snapshot is from iteration " + std::to_string(grad.iter()) +
                          " but loss snapshot from " + std::to_string(loss.iter()));
  }
  const auto k = grad.num_tasks();
  if (loss.num_tasks() != k || weights.size() != k) {
    throw InvalidArgument("snapshots and weights disagree on the task count");
  }

  MetricRecord r;
  r.iter = grad.iter();
  r.weights.assign(weights.begin(), weights.end());

  const GradientSnapshot scaled = grad.scaled(weights.values());
  const auto gms = pairwise_mean_skipping(grad_magnitude_similarity, scaled);
  r.gms_mean = gms.mean;
  if (gms.skipped > 0) r.degenerate_flags |= kGmsPairSkipped;
  const auto gcs = pairwise_mean_skipping(grad_cosine_similarity, scaled);
  r.gcs_mean = gcs.mean;
  if (gcs.skipped > 0) r.degenerate_flags |= kGcsPairSkipped;

  try {
    const auto cn = condition_number_detail(scaled);
    r.cond_number = cn.value;
    if (cn.floored) r.degenerate_flags |= kConditionFloored;
  } catch (const DegenerateInput&) {
    r.cond_number = kNaN;
    r.degenerate_flags |= kConditionUndefined;
  }

  r.ilr_per_task = inverse_learning_rate(loss);
  r.ilr_std = task_std(r.ilr_per_task);

  bool prev_positive = true;
  for (double p : loss.prev_losses()) prev_positive = prev_positive && p > 0.0;
  if (prev_positive) {
    r.ldr_per_task = loss_descending_rate(loss);
  } else {
    r.ldr_per_task.assign(k, kNaN);
    r.degenerate_flags |= kDescendingRateUndefined;
  }

  std::vector<double> weighted(k);
  for (std::size_t i = 0; i < k; ++i) weighted[i] = weights[i] * loss.losses()[i];
  try {
    r.rl_per_task = relative_loss(weighted);
    r.rl_std = task_std(r.rl_per_task);
  } catch (const DegenerateInput&) {
    r.rl_per_task.assign(k, kNaN);
    r.rl_std = kNaN;
    r.degenerate_flags |= kRelativeLossUndefined;
  }
  return r;
}

}  // namespace autoscale
