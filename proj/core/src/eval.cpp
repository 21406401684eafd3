// SPDX-License-Identifier: Apache-2.0
#include "autoscale/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "autoscale/error.hpp"

namespace autoscale {

double signed_task_drop(const TaskScore& score) {
  if (score.baseline == 0.0) throw InvalidArgument("task baseline must be nonzero");
  const double delta = (score.value - score.baseline) / score.baseline * 100.0;
  return score.higher_is_better ? -delta : delta;
}

double delta_m(std::span<const TaskScore> scores) {
  if (scores.empty()) throw InvalidArgument("delta_m needs at least one task");
  double sum = 0.0;
  for (const auto& s : scores) sum += signed_task_drop(s);
  return sum / static_cast<double>(scores.size());
}

double delta_m_deg(std::span<const TaskScore> scores) {
  if (scores.empty()) throw InvalidArgument("delta_m_deg needs at least one task");
  double sum = 0.0;
  for (const auto& s : scores) sum += std::max(signed_task_drop(s), 0.0);
  return sum;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const auto n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share ranks i+1..j+1.
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t p = i; p <= j; ++p) ranks[order[p]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::vector<double> mean_rank(const std::vector<std::vector<double>>& scores,
                              const std::vector<bool>& higher_is_better) {
  if (scores.size() < 2) throw InvalidArgument("mean rank needs at least two methods");
  const auto tasks = higher_is_better.size();
  if (tasks == 0) throw InvalidArgument("mean rank needs at least one task");
  for (const auto& row : scores) {
    if (row.size() != tasks) throw InvalidArgument("score matrix shape does not match the task count");
  }
  std::vector<double> out(scores.size(), 0.0);
  std::vector<double> column(scores.size());
  for (std::size_t t = 0; t < tasks; ++t) {
    for (std::size_t m = 0; m < scores.size(); ++m) {
      column[m] = higher_is_better[t] ? -scores[m][t] : scores[m][t];
    }
    const auto ranks = average_ranks(column);
    for (std::size_t m = 0; m < scores.size(); ++m) out[m] += ranks[m];
  }
  for (auto& r : out) r /= static_cast<double>(tasks);
  return out;
}

double spearman_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("spearman inputs differ in length");
  if (x.size() < 3) throw InvalidArgument("spearman correlation needs at least three points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) throw InvalidArgument("spearman correlation of a constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace autoscale
