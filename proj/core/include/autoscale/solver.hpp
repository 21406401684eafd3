// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>

#include "autoscale/costs.hpp"
#include "autoscale/snapshot.hpp"
#include "autoscale/weights.hpp"

namespace autoscale {

enum class SolverMethod { ClosedFormQP, SimplexSearch };

std::string_view to_string(SolverMethod method);

/// Result of minimizing a window cost over {sum(w) = K, w >= floor}.
struct SolverReport {
  WeightVector w_star;
  double cost_at_w_star = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  SolverMethod method = SolverMethod::ClosedFormQP;
};

/// Euclidean projection of `raw` onto {sum(w) = K, w >= floor}:
/// w_i = max(raw_i - mu, floor) with the shift mu fixed by the sum. Computed
/// by repeatedly pinning entries that fall below the floor and shifting the
/// free ones. Throws InvalidArgument for K < 2 or non-finite input.
WeightVector project_feasible(std::span<const double> raw, double floor = kDefaultWeightFloor);

/// Minimizes w^T M w subject to 1^T w = K and w >= floor.
///
/// Active-set method: the equality-constrained problem is solved on the free
/// coordinates, the most violated coordinate is pinned at the floor and the
/// solve repeats; pinned coordinates whose multiplier turns negative are
/// released. When M is singular on the feasible subspace, the minimizer
/// closest to uniform weights is returned. Throws InvalidArgument when M is
/// not square, not symmetric, or has an eigenvalue below -1e-8 lambda_max.
SolverReport solve_quadratic(const Eigen::MatrixXd& m, double floor = kDefaultWeightFloor);

struct SearchOptions {
  std::size_t max_evaluations = 20000;
  std::size_t restarts = 4;          ///< perturbed starts besides w_init
  double perturbation = 0.75;        ///< std-dev of the log-weight perturbation
  double initial_step = 0.5;         ///< simplex edge in log-weight space
  double tolerance = 1e-8;           ///< improvement that ends a search
  double floor = kDefaultWeightFloor;
  std::uint64_t seed = 0;
};

using WeightCostFunction = std::function<double(std::span<const double>)>;

/// Derivative-free minimization of `cost` over the feasible simplex.
///
/// Weights are parameterized as w = K softmax(z) (then floored), which makes
/// the problem unconstrained in z. Nelder-Mead runs from w_init and from
/// `restarts` randomly perturbed copies of it; every start is re-run from its
/// best point until a whole round improves the cost by less than
/// `tolerance`. Among candidates tied for the lowest cost, the one closest to
/// uniform weights wins. The result is never worse than w_init. If the
/// evaluation budget runs out before the first round finishes, w_init is
/// returned with converged = false.
SolverReport solve_general(const WeightCostFunction& cost, const WeightVector& w_init,
                           const SearchOptions& options = {});

/// Picks the solver path for `kind` and minimizes its window cost.
/// cost_at_w_star is recomputed with window_cost on the returned weights.
SolverReport solve_window(CostKind kind, const WindowBuffer& window, const WeightVector& w_prev,
                          const SearchOptions& options = {});

}  // namespace autoscale
