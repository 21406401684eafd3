// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "autoscale/costs.hpp"
#include "autoscale/error.hpp"
#include "autoscale/solver.hpp"
#include "oracles.hpp"

namespace autoscale {
namespace {

constexpr double kEps = kDefaultWeightFloor;

GradientSnapshot orthogonal_with_norms(const std::vector<double>& norms, std::uint64_t iter = 0) {
  const auto k = static_cast<Eigen::Index>(norms.size());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) gram(i, i) = norms[i] * norms[i];
  return GradientSnapshot::from_gram(gram, iter);
}

WindowBuffer random_window(std::mt19937_64& rng, std::size_t k, std::size_t length) {
  std::uniform_real_distribution<double> u(0.2, 3.0);
  WindowBuffer window(length);
  std::vector<double> ones(k, 1.0);
  for (std::size_t t = 0; t < length; ++t) {
    Eigen::MatrixXd g = oracle::random_matrix(rng, 6, static_cast<Eigen::Index>(k));
    for (Eigen::Index c = 0; c < g.cols(); ++c) g.col(c) *= u(rng);
    window.push(snapshot_from_gradients(g, t), LossSnapshot::first(ones, t));
  }
  return window;
}

double quad(const Eigen::MatrixXd& m, const std::vector<double>& w) {
  const Eigen::Map<const Eigen::VectorXd> v(w.data(), static_cast<Eigen::Index>(w.size()));
  return v.dot(m * v);
}

double quad(const Eigen::MatrixXd& m, const WeightVector& w) {
  return quad(m, std::vector<double>(w.begin(), w.end()));
}

TEST(ProjectFeasible, PinsNegativeEntry) {
  const auto w = project_feasible(std::vector<double>{3.0, -1.0});
  EXPECT_NEAR(w[0], 2.0 - kEps, 1e-15);
  EXPECT_EQ(w[1], kEps);
}

TEST(ProjectFeasible, PinsTwoOfThree) {
  const auto w = project_feasible(std::vector<double>{0.0, 0.0, 6.0});
  EXPECT_EQ(w[0], kEps);
  EXPECT_EQ(w[1], kEps);
  EXPECT_NEAR(w[2], 3.0 - 2.0 * kEps, 1e-15);
}

TEST(ProjectFeasible, FeasibleInputUnchanged) {
  const std::vector<double> raw{0.5, 1.0, 1.5};
  const auto w = project_feasible(raw);
  for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_NEAR(w[i], raw[i], 1e-15);
}

TEST(ProjectFeasible, IsTheNearestFeasiblePoint) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal(1.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    const std::vector<double> raw{normal(rng), normal(rng), normal(rng)};
    const auto w = project_feasible(raw);
    double best = 0.0;
    for (std::size_t i = 0; i < 3; ++i) best += (w[i] - raw[i]) * (w[i] - raw[i]);
    const double grid = oracle::grid_minimum(3, 0.02, kEps, [&](const std::vector<double>& p) {
      double d = 0.0;
      for (std::size_t i = 0; i < 3; ++i) d += (p[i] - raw[i]) * (p[i] - raw[i]);
      return d;
    });
    ASSERT_LE(best, grid + 1e-12);
  }
}

TEST(ProjectFeasible, Rejects) {
  EXPECT_THROW(project_feasible(std::vector<double>{1.0}), InvalidArgument);
  EXPECT_THROW(project_feasible(std::vector<double>{1.0, std::nan("")}), InvalidArgument);
}

TEST(SolveQuadratic, EqualGradientNormsTwoTasks) {
  // Pair matrix row (2, -1): the cost vanishes at 2 w_1 = w_2.
  Eigen::MatrixXd m(2, 2);
  m << 4.0, -2.0, -2.0, 1.0;
  const auto report = solve_quadratic(m);
  EXPECT_NEAR(report.w_star[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(report.w_star[1], 4.0 / 3.0, 1e-12);
  EXPECT_NEAR(report.cost_at_w_star, 0.0, 1e-12);
  EXPECT_TRUE(report.converged);
  EXPECT_EQ(report.method, SolverMethod::ClosedFormQP);
}

TEST(SolveQuadratic, IdentityGivesUniform) {
  const auto report = solve_quadratic(Eigen::MatrixXd::Identity(4, 4));
  for (double w : report.w_star) EXPECT_NEAR(w, 1.0, 1e-12);
}

TEST(SolveQuadratic, SingularPicksPointClosestToUniform) {
  const auto report = solve_quadratic(Eigen::MatrixXd::Zero(3, 3));
  for (double w : report.w_star) EXPECT_NEAR(w, 1.0, 1e-12);
}

Eigen::MatrixXd pinned_instance() {
  // S 1 = (1.5, 1, -0.5): the unconstrained minimizer M^-1 1 / (1^T M^-1 1)
  // has a negative third entry.
  Eigen::MatrixXd s(3, 3);
  s << 3.0, 0.0, -1.5,
       0.0, 1.0, 0.0,
       -1.5, 0.0, 1.0;
  return s.inverse();
}

TEST(SolveQuadratic, PinnedCoordinateMatchesGrid) {
  const Eigen::MatrixXd m = pinned_instance();
  const auto report = solve_quadratic(m);
  EXPECT_EQ(report.w_star[2], kEps);
  std::vector<double> argmin;
  const double grid = oracle::grid_minimum(3, 0.01, kEps,
                                           [&](const std::vector<double>& w) { return quad(m, w); },
                                           &argmin);
  EXPECT_LE(report.cost_at_w_star, grid + 1e-12);
  EXPECT_NEAR(report.cost_at_w_star, grid, 1e-4);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(report.w_star[i], argmin[i], 0.02);
}

void expect_kkt(const Eigen::MatrixXd& m, const WeightVector& w, double floor) {
  const Eigen::Map<const Eigen::VectorXd> v(w.values().data(), static_cast<Eigen::Index>(w.size()));
  const Eigen::VectorXd grad = 2.0 * m * v;
  const double scale = std::max(1.0, grad.cwiseAbs().maxCoeff());
  double lambda = std::nan("");
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > floor) {
      if (std::isnan(lambda)) lambda = grad(static_cast<Eigen::Index>(i));
      EXPECT_NEAR(grad(static_cast<Eigen::Index>(i)), lambda, 1e-8 * scale);
    }
  }
  ASSERT_FALSE(std::isnan(lambda));
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == floor) EXPECT_GE(grad(static_cast<Eigen::Index>(i)), lambda - 1e-8 * scale);
  }
}

TEST(SolveQuadratic, KktCertificate) {
  expect_kkt(pinned_instance(), solve_quadratic(pinned_instance()).w_star, kEps);
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<int> kd(2, 6);
  for (int t = 0; t < 300; ++t) {
    const auto k = kd(rng);
    const Eigen::MatrixXd a = oracle::random_matrix(rng, k, k);
    const Eigen::MatrixXd m = a.transpose() * a;
    const auto report = solve_quadratic(m);
    double sum = 0.0;
    for (double w : report.w_star) {
      ASSERT_GE(w, kEps);
      sum += w;
    }
    ASSERT_NEAR(sum, static_cast<double>(k), kWeightSumTolerance);
    expect_kkt(m, report.w_star, kEps);
  }
}

TEST(SolveQuadratic, MatchesGridOnRandomThreeTaskInstances) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd a = oracle::random_matrix(rng, 2, 3);
    const Eigen::MatrixXd m = a.transpose() * a;
    const auto report = solve_quadratic(m);
    const double grid = oracle::grid_minimum(3, 0.02, kEps,
                                             [&](const std::vector<double>& w) { return quad(m, w); });
    ASSERT_LE(report.cost_at_w_star, grid + 1e-10);
    ASSERT_NEAR(quad(m, report.w_star), report.cost_at_w_star, 1e-10 * std::max(1.0, grid));
  }
}

TEST(SolveQuadratic, RejectsInvalidMatrices) {
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(solve_quadratic(indefinite), InvalidArgument);
  Eigen::MatrixXd asymmetric(2, 2);
  asymmetric << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(solve_quadratic(asymmetric), InvalidArgument);
  EXPECT_THROW(solve_quadratic(Eigen::MatrixXd::Identity(2, 3)), InvalidArgument);
}

TEST(SolveGeneral, LowConditionTwoTasks) {
  // Orthogonal norms (1, 2): kappa = max(w_1, 2 w_2) / min(w_1, 2 w_2).
  const auto grad = orthogonal_with_norms({1.0, 2.0});
  const auto loss = LossSnapshot::first({1.0, 1.0});
  const WeightCostFunction cost = [&](std::span<const double> w) {
    return cost_per_iteration(CostKind::LowConditionNumber, make_weight_vector(w), grad, loss);
  };
  const auto report = solve_general(cost, WeightVector::uniform(2));
  EXPECT_EQ(report.method, SolverMethod::SimplexSearch);
  EXPECT_NEAR(report.cost_at_w_star, 1.0, 1e-6);
  EXPECT_NEAR(report.w_star[0], 4.0 / 3.0, 1e-4);
  EXPECT_NEAR(report.w_star[1], 2.0 / 3.0, 1e-4);
}

TEST(SolveGeneral, LowConditionThreeTasksMatchesGrid) {
  std::mt19937_64 rng(24);
  for (int t = 0; t < 5; ++t) {
    const auto window = random_window(rng, 3, 4);
    const auto report = solve_window(CostKind::LowConditionNumber, window, WeightVector::uniform(3));
    const double grid = oracle::grid_minimum(3, 0.05, kEps, [&](const std::vector<double>& w) {
      return window_cost_detail(CostKind::LowConditionNumber, w, window).value;
    });
    EXPECT_LE(report.cost_at_w_star, grid + 1e-9) << "instance " << t;
    EXPECT_GE(report.cost_at_w_star, 1.0);
  }
}

TEST(SolveGeneral, NeverWorseThanStart) {
  std::mt19937_64 rng(25);
  for (int t = 0; t < 10; ++t) {
    const auto window = random_window(rng, 3, 3);
    const auto start = make_weight_vector(std::vector<double>{0.2, 1.0, 2.0});
    SearchOptions options;
    options.max_evaluations = 50;
    const auto report = solve_window(CostKind::LowConditionNumber, window, start, options);
    ASSERT_LE(report.cost_at_w_star, window_cost(CostKind::LowConditionNumber, start, window));
  }
}

TEST(SolveGeneral, DeterministicForSeed) {
  std::mt19937_64 rng(26);
  const auto window = random_window(rng, 4, 5);
  SearchOptions options;
  options.seed = 99;
  const auto a = solve_window(CostKind::LowConditionNumber, window, WeightVector::uniform(4), options);
  const auto b = solve_window(CostKind::LowConditionNumber, window, WeightVector::uniform(4), options);
  EXPECT_EQ(a.w_star, b.w_star);
  EXPECT_EQ(a.cost_at_w_star, b.cost_at_w_star);
}

TEST(SolveWindow, QuadraticKindsUseClosedForm) {
  std::mt19937_64 rng(27);
  const auto window = random_window(rng, 3, 6);
  for (auto kind : {CostKind::EqualGradNorm, CostKind::EqualLoss}) {
    const auto report = solve_window(kind, window, WeightVector::uniform(3));
    EXPECT_EQ(report.method, SolverMethod::ClosedFormQP);
    EXPECT_NEAR(report.cost_at_w_star, window_cost(kind, report.w_star, window), 1e-12);
    EXPECT_LE(report.cost_at_w_star, window_cost(kind, WeightVector::uniform(3), window) + 1e-12);
  }
}

TEST(SolveWindow, BalancedWindowKeepsUniform) {
  WindowBuffer window(2);
  window.push(orthogonal_with_norms({2.0, 2.0, 2.0}, 0), LossSnapshot::first({1.0, 1.0, 1.0}, 0));
  window.push(orthogonal_with_norms({1.0, 1.0, 1.0}, 1), LossSnapshot::first({1.0, 1.0, 1.0}, 1));
  for (auto kind : {CostKind::EqualGradNorm, CostKind::EqualLoss, CostKind::LowConditionNumber}) {
    const auto report = solve_window(kind, window, WeightVector::uniform(3));
    for (double w : report.w_star) EXPECT_NEAR(w, 1.0, 1e-9) << to_string(kind);
  }
}

}  // namespace
}  // namespace autoscale
