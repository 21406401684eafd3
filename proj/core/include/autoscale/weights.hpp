// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace autoscale {

/// Smallest value any task weight may take unless configured otherwise.
inline constexpr double kDefaultWeightFloor = 1e-4;

/// Absolute tolerance on the sum-to-K constraint.
inline constexpr double kWeightSumTolerance = 1e-8;

/// Linear scalarization weights w in R+^K with sum(w) = K and every
/// w_i >= floor. Instances can only be obtained through functions that
/// establish both invariants, so holding a WeightVector is proof of
/// feasibility.
class WeightVector {
 public:
  /// All-ones weights of length `num_tasks`.
  static WeightVector uniform(std::size_t num_tasks);

  /// Adopts `values` unchanged after checking the invariants against
  /// `floor`. Used where the exact bits matter (trace parsing, means of
  /// feasible points). Throws InvalidArgument on violation.
  static WeightVector from_feasible(std::vector<double> values,
                                    double floor = kDefaultWeightFloor);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  bool operator==(const WeightVector&) const = default;

 private:
  explicit WeightVector(std::vector<double> values) : values_(std::move(values)) {}

  friend WeightVector make_weight_vector(std::span<const double>, double);
  friend WeightVector project_feasible(std::span<const double>, double);

  std::vector<double> values_;
};

/// Rescales arbitrary nonnegative raw weights onto the feasible set.
///
/// Negative entries are clamped to zero, the vector is scaled to sum to K,
/// and then every entry below `floor` is pinned at `floor` while the
/// remaining entries are rescaled to absorb the difference. Pinning repeats
/// until no free entry falls below the floor. Throws InvalidArgument for
/// K < 2, non-finite input, or input with no positive entry.
WeightVector make_weight_vector(std::span<const double> raw,
                                double floor = kDefaultWeightFloor);

}  // namespace autoscale
