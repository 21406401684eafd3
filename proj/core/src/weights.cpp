// SPDX-License-Identifier: Apache-2.0
#include "autoscale/weights.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "autoscale/error.hpp"

namespace autoscale {
namespace {

void check_floor(double floor) {
  if (!(floor >= 0.0 && floor < 1.0)) {
    throw InvalidArgument("weight floor must lie in [0, 1), got " + std::to_string(floor));
  }
}

}  // namespace

WeightVector WeightVector::uniform(std::size_t num_tasks) {
  if (num_tasks < 2) throw InvalidArgument("a weight vector needs at least two tasks");
  return WeightVector(std::vector<double>(num_tasks, 1.0));
}

WeightVector WeightVector::from_feasible(std::vector<double> values, double floor) {
  check_floor(floor);
  const auto k = values.size();
  if (k < 2) throw InvalidArgument("a weight vector needs at least two tasks");
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!std::isfinite(values[i])) throw InvalidArgument("weight vector has a non-finite entry");
    if (values[i] < floor || values[i] <= 0.0) {
      throw InvalidArgument("weight " + std::to_string(i) + " = " + std::to_string(values[i]) +
                            " is below the floor");
    }
    sum += values[i];
  }
  if (std::abs(sum - static_cast<double>(k)) > kWeightSumTolerance) {
    throw InvalidArgument("weights sum to " + std::to_string(sum) + ", expected " +
                          std::to_string(k));
  }
  return WeightVector(std::move(values));
}

WeightVector make_weight_vector(std::span<const double> raw, double floor) {
  check_floor(floor);
  const auto k = raw.size();
  if (k < 2) throw InvalidArgument("a weight vector needs at least two tasks");

  std::vector<double> w(k);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!std::isfinite(raw[i])) throw InvalidArgument("raw weights contain a non-finite entry");
    w[i] = raw[i] > 0.0 ? raw[i] : 0.0;
    sum += w[i];
  }
  if (sum <= 0.0) throw InvalidArgument("raw weights have no positive entry");

  const double target = static_cast<double>(k);
  for (auto& x : w) x *= target / sum;

  // Pin entries under the floor and rescale the free ones to fill the rest.
  // Each pass pins at least one more entry, so this terminates within K
  // passes; the largest entry can never be pinned because floor < 1.
  std::vector<bool> pinned(k, false);
  for (std::size_t pass = 0; pass < k; ++pass) {
    bool changed = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (!pinned[i] && w[i] < floor) {
        pinned[i] = true;
        changed = true;
      }
    }
    if (!changed) break;
    double free_sum = 0.0;
    std::size_t num_pinned = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (pinned[i]) {
        ++num_pinned;
      } else {
        free_sum += w[i];
      }
    }
    const double free_target = target - static_cast<double>(num_pinned) * floor;
    for (std::size_t i = 0; i < k; ++i) {
      w[i] = pinned[i] ? floor : w[i] * (free_target / free_sum);
    }
  }
  return WeightVector(std::move(w));
}

}  // namespace autoscale
