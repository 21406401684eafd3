// SPDX-License-Identifier: Apache-2.0
#include "autoscale/costs.hpp"

#include <string>

#include "autoscale/error.hpp"
#include "autoscale/metrics.hpp"

namespace autoscale {
namespace {

std::span<const double> magnitudes_for(CostKind kind, const WindowEntry& entry) {
  return kind == CostKind::EqualLoss ? entry.loss.losses() : entry.grad.norms();
}

// ||A(m) w||^2 = sum_{i<j} (w_i m_i - w_j m_j)^2, without forming A.
double pair_difference_energy(std::span<const double> m, std::span<const double> w) {
  double total = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double a = w[i] * m[i];
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      const double d = a - w[j] * m[j];
      total += d * d;
    }
  }
  return total;
}

}  // namespace

std::string_view to_string(CostKind kind) {
  switch (kind) {
    case CostKind::EqualGradNorm:
      return "equal-grad";
    case CostKind::EqualLoss:
      return "equal-loss";
    case CostKind::LowConditionNumber:
      return "low-cond";
  }
  return "unknown";
}

CostKind parse_cost_kind(std::string_view name) {
  if (name == "equal-grad") return CostKind::EqualGradNorm;
  if (name == "equal-loss") return CostKind::EqualLoss;
  if (name == "low-cond") return CostKind::LowConditionNumber;
  throw InvalidArgument("unknown cost kind '" + std::string(name) +
                        "' (expected equal-grad, equal-loss or low-cond)");
}

Eigen::Index PairDifferenceMatrix::row_of(std::size_t i, std::size_t j, std::size_t num_tasks) {
  // Rows before pair (i, .) : sum_{a<i} (K - 1 - a).
  const auto k = num_tasks;
  return static_cast<Eigen::Index>(i * (2 * k - i - 1) / 2 + (j - i - 1));
}

PairDifferenceMatrix build_pair_matrix(std::span<const double> magnitudes) {
  const auto k = magnitudes.size();
  if (k < 2) throw InvalidArgument("pair matrix needs at least two tasks");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k * (k - 1) / 2),
                                            static_cast<Eigen::Index>(k));
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j, ++row) {
      a(row, static_cast<Eigen::Index>(i)) = magnitudes[i];
      a(row, static_cast<Eigen::Index>(j)) = -magnitudes[j];
    }
  }
  return PairDifferenceMatrix(std::move(a));
}

bool is_degenerate(CostKind kind, const WindowEntry& entry) {
  const auto m = magnitudes_for(kind, entry);
  for (double x : m) {
    if (x != 0.0) return false;
  }
  return true;
}

double cost_per_iteration(CostKind kind, std::span<const double> w, const WindowEntry& entry) {
  if (w.size() != entry.grad.num_tasks() || w.size() != entry.loss.num_tasks()) {
    throw InvalidArgument("weight count does not match task count");
  }
  if (kind == CostKind::LowConditionNumber) {
    return condition_number_detail(entry.grad, w).value;
  }
  return pair_difference_energy(magnitudes_for(kind, entry), w);
}

double cost_per_iteration(CostKind kind, const WeightVector& w, const GradientSnapshot& grad,
                          const LossSnapshot& loss) {
  if (grad.iter() != loss.iter()) throw InvalidArgument("snapshots come from different iterations");
  return cost_per_iteration(kind, w.values(), WindowEntry{grad, loss});
}

WindowCost window_cost_detail(CostKind kind, std::span<const double> w,
                              const WindowBuffer& window) {
  if (window.empty()) throw InvalidArgument("window cost of an empty window");
  WindowCost out;
  double sum = 0.0;
  for (const auto& entry : window) {
    if (is_degenerate(kind, entry)) {
      ++out.skipped;
      continue;
    }
    sum += cost_per_iteration(kind, w, entry);
    ++out.used;
  }
  if (out.used == 0) {
    throw DegenerateInput("every snapshot in the window is degenerate for cost " +
                          std::string(to_string(kind)));
  }
  out.value = sum / static_cast<double>(out.used);
  return out;
}

double window_cost(CostKind kind, const WeightVector& w, const WindowBuffer& window) {
  return window_cost_detail(kind, w.values(), window).value;
}

Eigen::MatrixXd quadratic_form(CostKind kind, const WindowBuffer& window) {
  if (!is_quadratic(kind)) {
    throw InvalidArgument("the condition-number cost is not a quadratic form");
  }
  if (window.empty()) throw InvalidArgument("quadratic form of an empty window");
  const auto k = static_cast<Eigen::Index>(window.num_tasks());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  std::size_t used = 0;
  for (const auto& entry : window) {
    if (is_degenerate(kind, entry)) continue;
    // A^T A has (K-1) m_i^2 on the diagonal and -m_i m_j elsewhere.
    const auto mag = magnitudes_for(kind, entry);
    for (Eigen::Index i = 0; i < k; ++i) {
      m(i, i) += static_cast<double>(k - 1) * mag[i] * mag[i];
      for (Eigen::Index j = i + 1; j < k; ++j) {
        m(i, j) -= mag[i] * mag[j];
        m(j, i) -= mag[i] * mag[j];
      }
    }
    ++used;
  }
  if (used == 0) throw DegenerateInput("every snapshot in the window is degenerate");
  return m / static_cast<double>(used);
}

}  // namespace autoscale
