// SPDX-License-Identifier: Apache-2.0
#include "autoscale/solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "autoscale/error.hpp"
#include "autoscale/linalg.hpp"
#include "autoscale/random.hpp"

namespace autoscale {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool already_feasible(std::span<const double> raw, double floor) {
  double sum = 0.0;
  for (double x : raw) {
    if (!(x >= floor) || x <= 0.0) return false;
    sum += x;
  }
  return std::abs(sum - static_cast<double>(raw.size())) <= kWeightSumTolerance;
}

// Orthonormal basis (n x (n-1)) of the complement of the all-ones vector.
Eigen::MatrixXd ones_complement_basis(Eigen::Index n) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd::Ones(n, 1));
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return q.rightCols(n - 1);
}

// Minimizer of w^T M w over the free coordinates with the pinned ones held
// at `floor` and the free ones summing to K - |pinned| floor. Among several
// minimizers, returns the one closest to the uniform split of the free mass.
std::vector<double> solve_free_subproblem(const Eigen::MatrixXd& m, const std::vector<bool>& pinned,
                                          double floor) {
  const auto n = static_cast<std::size_t>(m.rows());
  std::vector<Eigen::Index> free_idx;
  std::vector<Eigen::Index> pinned_idx;
  for (std::size_t i = 0; i < n; ++i) {
    (pinned[i] ? pinned_idx : free_idx).push_back(static_cast<Eigen::Index>(i));
  }
  std::vector<double> w(n, floor);
  const auto nf = static_cast<Eigen::Index>(free_idx.size());
  const double free_mass = static_cast<double>(n) - static_cast<double>(pinned_idx.size()) * floor;
  if (nf == 1) {
    w[static_cast<std::size_t>(free_idx[0])] = free_mass;
    return w;
  }

  Eigen::MatrixXd mff(nf, nf);
  Eigen::VectorXd coupling = Eigen::VectorXd::Zero(nf);
  for (Eigen::Index a = 0; a < nf; ++a) {
    for (Eigen::Index b = 0; b < nf; ++b) mff(a, b) = m(free_idx[a], free_idx[b]);
    for (auto p : pinned_idx) coupling(a) += m(free_idx[a], p) * floor;
  }
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(nf, free_mass / static_cast<double>(nf));
  const Eigen::MatrixXd basis = ones_complement_basis(nf);
  const Eigen::MatrixXd h = basis.transpose() * mff * basis;
  const Eigen::VectorXd rhs = -basis.transpose() * (mff * u + coupling);

  // Minimum-norm solution of h z = rhs through the pseudo-inverse.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (h + h.transpose()));
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double cutoff = 1e-12 * std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::VectorXd coeff = eig.eigenvectors().transpose() * rhs;
  for (Eigen::Index i = 0; i < coeff.size(); ++i) {
    coeff(i) = lambda(i) > cutoff ? coeff(i) / lambda(i) : 0.0;
  }
  const Eigen::VectorXd z = eig.eigenvectors() * coeff;
  const Eigen::VectorXd wf = u + basis * z;
  for (Eigen::Index a = 0; a < nf; ++a) w[static_cast<std::size_t>(free_idx[a])] = wf(a);
  return w;
}

double quadratic_value(const Eigen::MatrixXd& m, const std::vector<double>& w) {
  const Eigen::Map<const Eigen::VectorXd> v(w.data(), static_cast<Eigen::Index>(w.size()));
  return v.dot(m * v);
}

// Reinstates sum(w) = K after floating-point drift by adjusting the largest
// free entry, which keeps pinned entries exactly at the floor.
std::vector<double> settle_sum(std::vector<double> w, const std::vector<bool>& pinned) {
  double sum = 0.0;
  for (double x : w) sum += x;
  std::size_t largest = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!pinned[i] && w[i] > w[largest]) largest = i;
  }
  w[largest] += static_cast<double>(w.size()) - sum;
  return w;
}

// Weights from unconstrained log-weight coordinates z (last coordinate fixed
// at zero).
std::vector<double> weights_from_logits(const Eigen::VectorXd& z, std::size_t k, double floor) {
  std::vector<double> e(k);
  double zmax = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) zmax = std::max(zmax, z(i));
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double zi = i + 1 < k ? z(static_cast<Eigen::Index>(i)) : 0.0;
    e[i] = std::exp(zi - zmax);
    sum += e[i];
  }
  for (auto& x : e) x *= static_cast<double>(k) / sum;
  const auto w = make_weight_vector(e, floor);
  return {w.begin(), w.end()};
}

Eigen::VectorXd logits_from_weights(std::span<const double> w) {
  const auto k = w.size();
  Eigen::VectorXd z(static_cast<Eigen::Index>(k - 1));
  for (std::size_t i = 0; i + 1 < k; ++i) {
    z(static_cast<Eigen::Index>(i)) = std::log(w[i]) - std::log(w[k - 1]);
  }
  return z;
}

struct BudgetExhausted {};

class CountingObjective {
 public:
  CountingObjective(const WeightCostFunction& cost, std::size_t k, double floor, std::size_t budget)
      : cost_(cost), k_(k), floor_(floor), budget_(budget) {}

  double operator()(const Eigen::VectorXd& z) {
    if (evaluations_ >= budget_) throw BudgetExhausted{};
    ++evaluations_;
    const double f = cost_(weights_from_logits(z, k_, floor_));
    return std::isfinite(f) ? f : kInf;
  }

  double raw(std::span<const double> w) {
    if (evaluations_ >= budget_) throw BudgetExhausted{};
    ++evaluations_;
    const double f = cost_(w);
    return std::isfinite(f) ? f : kInf;
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  const WeightCostFunction& cost_;
  std::size_t k_;
  double floor_;
  std::size_t budget_;
  std::size_t evaluations_ = 0;
};

struct SimplexResult {
  Eigen::VectorXd x;
  double f;
};

// One Nelder-Mead descent from x0 with an axis-aligned initial simplex.
SimplexResult nelder_mead(CountingObjective& f, const Eigen::VectorXd& x0, double f0, double step) {
  const Eigen::Index n = x0.size();
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> vals(static_cast<std::size_t>(n + 1), f0);
  for (Eigen::Index i = 0; i < n; ++i) {
    pts[static_cast<std::size_t>(i + 1)](i) += step;
    vals[static_cast<std::size_t>(i + 1)] = f(pts[static_cast<std::size_t>(i + 1)]);
  }

  std::vector<std::size_t> order(pts.size());
  const int max_iter = 400 * static_cast<int>(n + 1);
  for (int iter = 0; iter < max_iter; ++iter) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
    const auto best = order.front();
    const auto worst = order.back();
    const auto second_worst = order[order.size() - 2];

    double diameter = 0.0;
    for (const auto& p : pts) diameter = std::max(diameter, (p - pts[best]).cwiseAbs().maxCoeff());
    const double spread = vals[worst] - vals[best];
    if (diameter < 1e-10 || (std::isfinite(spread) && spread <= 1e-15 * std::max(1.0, std::abs(vals[best])) && diameter < 1e-6)) {
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + (centroid - pts[worst]);
    const double fr = f(reflected);
    if (fr < vals[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = f(expanded);
      if (fe < fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second_worst]) {
      pts[worst] = reflected;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = f(contracted);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = contracted;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      vals[i] = f(pts[i]);
    }
  }
  const auto best = static_cast<std::size_t>(
      std::min_element(vals.begin(), vals.end()) - vals.begin());
  return {pts[best], vals[best]};
}

double distance_to_uniform(std::span<const double> w) {
  double d = 0.0;
  for (double x : w) d += (x - 1.0) * (x - 1.0);
  return d;
}

}  // namespace

std::string_view to_string(SolverMethod method) {
  return method == SolverMethod::ClosedFormQP ? "closed-form-qp" : "simplex-search";
}

WeightVector project_feasible(std::span<const double> raw, double floor) {
  if (!(floor >= 0.0 && floor < 1.0)) throw InvalidArgument("weight floor must lie in [0, 1)");
  const auto k = raw.size();
  if (k < 2) throw InvalidArgument("a weight vector needs at least two tasks");
  for (double x : raw) {
    if (!std::isfinite(x)) throw InvalidArgument("cannot project a non-finite vector");
  }
  if (already_feasible(raw, floor)) return WeightVector(std::vector<double>(raw.begin(), raw.end()));

  std::vector<bool> pinned(k, false);
  std::vector<double> w(k);
  const double target = static_cast<double>(k);
  for (std::size_t pass = 0; pass <= k; ++pass) {
    double free_sum = 0.0;
    std::size_t num_free = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (!pinned[i]) {
        free_sum += raw[i];
        ++num_free;
      }
    }
    const double free_target = target - static_cast<double>(k - num_free) * floor;
    const double shift = (free_sum - free_target) / static_cast<double>(num_free);
    bool changed = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (pinned[i]) {
        w[i] = floor;
      } else {
        w[i] = raw[i] - shift;
        if (w[i] < floor) {
          pinned[i] = true;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (pinned[i]) w[i] = floor;
  }
  return WeightVector(settle_sum(std::move(w), pinned));
}

SolverReport solve_quadratic(const Eigen::MatrixXd& m, double floor) {
  if (!(floor >= 0.0 && floor < 1.0)) throw InvalidArgument("weight floor must lie in [0, 1)");
  if (m.rows() != m.cols() || m.rows() < 2) {
    throw InvalidArgument("quadratic form must be square with at least two tasks");
  }
  if (!m.allFinite()) throw InvalidArgument("quadratic form has non-finite entries");
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InvalidArgument("quadratic form is not symmetric");
  }
  const Eigen::VectorXd eig = symmetric_eigenvalues(m);
  if (eig(0) < -1e-8 * std::max(eig(eig.size() - 1), 0.0) || eig(0) < -1e-8 * scale) {
    throw InvalidArgument("quadratic form is not positive semidefinite (min eigenvalue " +
                          std::to_string(eig(0)) + ")");
  }

  const auto k = static_cast<std::size_t>(m.rows());
  std::vector<bool> pinned(k, false);
  std::vector<double> w(k, 1.0);  // uniform weights are feasible for any floor < 1
  SolverReport report{WeightVector::uniform(k)};
  report.method = SolverMethod::ClosedFormQP;

  // Primal active-set iterations from a feasible point.
  const std::size_t max_iter = 8 * k + 16;
  for (; report.iterations < max_iter; ++report.iterations) {
    const auto target = solve_free_subproblem(m, pinned, floor);
    double step = 1.0;
    std::optional<std::size_t> blocking;
    double move = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (pinned[i]) continue;
      const double p = target[i] - w[i];
      move = std::max(move, std::abs(p));
      if (p < 0.0 && target[i] < floor) {
        const double limit = (floor - w[i]) / p;
        if (limit < step) {
          step = std::max(limit, 0.0);
          blocking = i;
        }
      }
    }

    if (move > 1e-13 * static_cast<double>(k)) {
      for (std::size_t i = 0; i < k; ++i) {
        if (!pinned[i]) w[i] += step * (target[i] - w[i]);
      }
      if (blocking) {
        pinned[*blocking] = true;
        w[*blocking] = floor;
      }
      continue;
    }

    // Stationary on the current working set: check the floor multipliers.
    const Eigen::Map<const Eigen::VectorXd> v(w.data(), static_cast<Eigen::Index>(k));
    const Eigen::VectorXd grad = 2.0 * (m * v);
    double lambda = 0.0;
    std::size_t num_free = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (!pinned[i]) {
        lambda += grad(static_cast<Eigen::Index>(i));
        ++num_free;
      }
    }
    lambda /= static_cast<double>(num_free);
    const double tol = 1e-10 * std::max(1.0, grad.cwiseAbs().maxCoeff());
    std::optional<std::size_t> release;
    double most_negative = -tol;
    for (std::size_t i = 0; i < k; ++i) {
      if (!pinned[i]) continue;
      const double mu = grad(static_cast<Eigen::Index>(i)) - lambda;
      if (mu < most_negative) {
        most_negative = mu;
        release = i;
      }
    }
    if (!release) {
      report.converged = true;
      break;
    }
    pinned[*release] = false;
  }

  for (std::size_t i = 0; i < k; ++i) {
    if (pinned[i] || w[i] < floor) {
      pinned[i] = true;
      w[i] = floor;
    }
  }
  w = settle_sum(std::move(w), pinned);
  report.w_star = WeightVector::from_feasible(w, floor);
  report.cost_at_w_star = quadratic_value(m, w);
  return report;
}

SolverReport solve_general(const WeightCostFunction& cost, const WeightVector& w_init,
                           const SearchOptions& options) {
  const auto k = w_init.size();
  CountingObjective objective(cost, k, options.floor, options.max_evaluations);

  SolverReport report{w_init};
  report.method = SolverMethod::SimplexSearch;
  report.converged = false;

  struct Candidate {
    std::vector<double> w;
    double cost;
  };
  std::vector<Candidate> candidates;
  double init_cost = kInf;

  std::mt19937_64 rng = make_rng(options.seed, SeedStream::SolverRestarts);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::VectorXd z_init = logits_from_weights(w_init.values());
  std::vector<Eigen::VectorXd> starts{z_init};
  for (std::size_t r = 0; r < options.restarts; ++r) {
    Eigen::VectorXd z = z_init;
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) += options.perturbation * normal(rng);
    starts.push_back(std::move(z));
  }

  bool any_round = false;
  bool all_converged = true;
  try {
    init_cost = objective.raw(w_init.values());
    candidates.push_back({{w_init.begin(), w_init.end()}, init_cost});
    for (const auto& start : starts) {
      Eigen::VectorXd x = start;
      double fx = objective(x);
      bool start_converged = false;
      for (int round = 0; round < 64; ++round) {
        const auto result = nelder_mead(objective, x, fx, options.initial_step);
        any_round = true;
        const double improvement = fx - result.f;
        if (result.f < fx) {
          x = result.x;
          fx = result.f;
        }
        candidates.push_back({weights_from_logits(x, k, options.floor), fx});
        if (!(improvement >= options.tolerance)) {
          start_converged = true;
          break;
        }
      }
      all_converged = all_converged && start_converged;
    }
  } catch (const BudgetExhausted&) {
    all_converged = false;
  }

  report.iterations = objective.evaluations();
  if (!any_round) {
    report.cost_at_w_star = init_cost;
    return report;
  }

  double best = kInf;
  for (const auto& c : candidates) best = std::min(best, c.cost);
  const double tie = best + 1e-12 * std::max(1.0, std::abs(best));
  const Candidate* chosen = nullptr;
  for (const auto& c : candidates) {
    if (c.cost <= tie && (chosen == nullptr || distance_to_uniform(c.w) < distance_to_uniform(chosen->w))) {
      chosen = &c;
    }
  }
  report.w_star = WeightVector::from_feasible(chosen->w, options.floor);
  report.cost_at_w_star = chosen->cost;
  report.converged = all_converged;
  return report;
}

SolverReport solve_window(CostKind kind, const WindowBuffer& window, const WeightVector& w_prev,
                          const SearchOptions& options) {
  SolverReport report = [&] {
    if (is_quadratic(kind)) return solve_quadratic(quadratic_form(kind, window), options.floor);
    const WeightCostFunction cost = [&](std::span<const double> w) {
      return window_cost_detail(kind, w, window).value;
    };
    return solve_general(cost, w_prev, options);
  }();
  report.cost_at_w_star = window_cost(kind, report.w_star, window);
  // Never regress past the weights the window was trained with.
  const double prev_cost = window_cost(kind, w_prev, window);
  if (prev_cost < report.cost_at_w_star) {
    report.w_star = w_prev;
    report.cost_at_w_star = prev_cost;
  }
  return report;
}

}  // namespace autoscale
