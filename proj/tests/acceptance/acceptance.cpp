// SPDX-License-Identifier: Apache-2.0
// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.
#include <Eigen/Dense>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "autoscale/baselines.hpp"
#include "autoscale/costs.hpp"
#include "autoscale/error.hpp"
#include "autoscale/eval.hpp"
#include "autoscale/metrics.hpp"
#include "autoscale/quadratic.hpp"
#include "autoscale/scheduler.hpp"
#include "autoscale/solver.hpp"
#include "autoscale_cli/commands.hpp"
#include "autoscale_cli/config.hpp"
#include "autoscale_cli/log.hpp"
#include "autoscale_cli/trace.hpp"
#include "oracles.hpp"

namespace {

using namespace autoscale;
using autoscale::cli::TraceLine;

class Check {
 public:
  void expect(bool condition, const std::string& what) {
    ++checks_;
    if (!condition && failures_.size() < 5) failures_.push_back(what);
    ok_ = ok_ && condition;
  }
  void near(double actual, double expected, double tol, const std::string& what) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": got " << actual << ", expected " << expected << " +- " << tol;
    expect(std::abs(actual - expected) <= tol, msg.str());
  }
  void note(const std::string& text) { notes_.push_back(text); }
  void fail_with(const std::string& what) { expect(false, what); }

  bool ok() const { return ok_; }
  std::size_t checks() const { return checks_; }
  const std::vector<std::string>& failures() const { return failures_; }
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  bool ok_ = true;
  std::size_t checks_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string fmt(double x, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

GradientSnapshot orthogonal_with_norms(const std::vector<double>& norms, std::uint64_t iter = 0) {
  const auto k = static_cast<Eigen::Index>(norms.size());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) gram(i, i) = norms[i] * norms[i];
  return GradientSnapshot::from_gram(gram, iter);
}

WindowBuffer constant_window(const GradientSnapshot& grad, const std::vector<double>& losses,
                             std::size_t length) {
  WindowBuffer window(length);
  for (std::size_t t = 0; t < length; ++t) {
    window.push(GradientSnapshot::from_gram(grad.gram(), t), LossSnapshot::first(losses, t));
  }
  return window;
}

bool throws_degenerate(const std::function<void()>& f) {
  try {
    f();
  } catch (const DegenerateInput&) {
    return true;
  } catch (...) {
    return false;
  }
  return false;
}

// Metric formula examples and the Gram-versus-SVD condition number check.
void metric_formula_suite(Check& c) {
  const auto gms = [](std::vector<double> n) {
    return grad_magnitude_similarity(orthogonal_with_norms(n), 0, 1);
  };
  c.near(gms({2.5, 2.5}), 1.0, 0.0, "GMS equal norms");
  c.near(gms({1.0, 2.0}), 0.8, 1e-15, "GMS norms (1,2)");
  c.near(gms({1.0, 0.0}), 0.0, 0.0, "GMS norms (1,0)");
  c.expect(throws_degenerate([&] { gms({0.0, 0.0}); }), "GMS both zero is degenerate");

  const auto gcs = [](const std::vector<std::vector<double>>& cols) {
    return grad_cosine_similarity(snapshot_from_gradients(cols), 0, 1);
  };
  c.near(gcs({{1.0, 2.0, -1.0}, {1.0, 2.0, -1.0}}), 1.0, 1e-15, "GCS identical");
  c.near(gcs({{1.0, 2.0, 0.0}, {-2.0, 1.0, 3.0}}), 0.0, 1e-15, "GCS orthogonal");
  c.near(gcs({{1.0, 2.0, -1.0}, {-1.0, -2.0, 1.0}}), -1.0, 1e-15, "GCS opposite");
  c.expect(throws_degenerate([&] { gcs({{0.0, 0.0}, {1.0, 0.0}}); }), "GCS zero norm is degenerate");

  c.near(condition_number(snapshot_from_gradients(Eigen::MatrixXd::Identity(3, 2))), 1.0, 1e-15,
         "kappa orthonormal");
  c.near(condition_number(orthogonal_with_norms({1.0, 2.0})), 2.0, 1e-14, "kappa norms (1,2)");
  Eigen::MatrixXd g(2, 2);
  g << 1.0, 1.0, 0.0, 0.01;
  const double svd = oracle::condition_number_svd(g);
  c.near(condition_number(snapshot_from_gradients(g)), svd, 1e-8 * svd,
         "kappa g1=(1,0), g2=(1,0.01) against SVD");
  c.note("kappa for g1=(1,0), g2=(1,0.01) = " + fmt(svd, 10) + " (SVD brute force)");
  c.expect(throws_degenerate([] { condition_number(orthogonal_with_norms({0.0, 0.0})); }),
           "kappa all-zero Gram is degenerate");

  const auto vec_eq = [&](const std::vector<double>& a, const std::vector<double>& b, const std::string& what) {
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i) same = std::abs(a[i] - b[i]) <= 1e-15;
    c.expect(same, what);
  };
  vec_eq(inverse_learning_rate(LossSnapshot({3.0, 4.0}, {3.0, 4.0}, {3.0, 4.0}, 0)), {1.0, 1.0}, "ILR start");
  vec_eq(inverse_learning_rate(LossSnapshot({1.0, 1.0}, {2.0, 4.0}, {1.0, 1.0}, 0)), {0.5, 0.25}, "ILR (0.5,0.25)");
  vec_eq(inverse_learning_rate(LossSnapshot({2.0, 0.5}, {1.0, 1.0}, {1.0, 1.0}, 0)), {2.0, 0.5}, "ILR divergence");
  vec_eq(loss_descending_rate(LossSnapshot({3.0, 4.0}, {1.0, 1.0}, {3.0, 4.0}, 0)), {1.0, 1.0}, "LDR plateau");
  vec_eq(loss_descending_rate(LossSnapshot({1.0, 3.0}, {1.0, 1.0}, {2.0, 2.0}, 0)), {0.5, 1.5}, "LDR (0.5,1.5)");
  vec_eq(loss_descending_rate(LossSnapshot({2.0, 2.0}, {1.0, 1.0}, {4.0, 1.0}, 0)), {0.5, 2.0}, "LDR (0.5,2)");
  vec_eq(relative_loss(std::vector<double>{1.0, 1.0, 2.0}), {0.25, 0.25, 0.5}, "RL (1,1,2)");
  vec_eq(relative_loss(std::vector<double>{0.7, 0.7, 0.7, 0.7}), {0.25, 0.25, 0.25, 0.25}, "RL uniform");
  vec_eq(relative_loss(std::vector<double>{0.0, 5.0}), {0.0, 1.0}, "RL (0,5)");

  const auto two = orthogonal_with_norms({1.0, 2.0});
  c.near(pairwise_mean(grad_magnitude_similarity, two), grad_magnitude_similarity(two, 0, 1), 0.0,
         "pairwise mean K=2");
  c.near(pairwise_mean(grad_magnitude_similarity, orthogonal_with_norms({1.0, 1.0, 1.0})), 1.0, 0.0,
         "pairwise GMS (1,1,1)");
  c.near(pairwise_mean(grad_magnitude_similarity, orthogonal_with_norms({1.0, 2.0, 2.0})),
         (oracle::gms(1, 2) + oracle::gms(1, 2) + oracle::gms(2, 2)) / 3.0, 1e-15, "pairwise GMS (1,2,2)");
  c.near(task_std(std::vector<double>{2.0, 2.0, 2.0}), 0.0, 0.0, "std constant");
  c.near(task_std(std::vector<double>{0.0, 2.0}), 1.0, 1e-15, "std (0,2)");
  c.near(task_std(std::vector<double>{1.0, 2.0, 3.0}), std::sqrt(2.0 / 3.0), 1e-15, "std (1,2,3)");

  const auto record = metric_record(snapshot_from_gradients(Eigen::MatrixXd::Identity(4, 3)),
                                    LossSnapshot::first({2.0, 2.0, 2.0}), WeightVector::uniform(3));
  c.expect(record.gms_mean == 1.0 && record.cond_number == 1.0 && record.rl_std == 0.0,
           "balanced record: gms 1, kappa 1, rl_std 0");
  c.expect(record.ldr_per_task == std::vector<double>{1.0, 1.0, 1.0}, "first-iteration LDR all ones");

  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> kd(2, 4);
  std::uniform_int_distribution<int> dd(1, 50);
  for (int t = 0; t < 200; ++t) {
    const auto k = kd(rng);
    const auto d = std::max(k, dd(rng));
    const auto m = oracle::random_matrix(rng, d, k);
    const double expected = oracle::condition_number_svd(m);
    c.near(condition_number(snapshot_from_gradients(m)), expected, 1e-8 * expected,
           "random kappa instance " + std::to_string(t));
  }
}

WindowBuffer random_window(std::mt19937_64& rng, std::size_t k, std::size_t length) {
  std::uniform_real_distribution<double> scale(0.2, 3.0);
  std::uniform_real_distribution<double> loss(0.1, 4.0);
  WindowBuffer window(length);
  std::vector<double> initial(k);
  for (auto& x : initial) x = loss(rng);
  std::vector<double> prev = initial;
  for (std::size_t t = 0; t < length; ++t) {
    Eigen::MatrixXd g = oracle::random_matrix(rng, 5, static_cast<Eigen::Index>(k));
    for (Eigen::Index col = 0; col < g.cols(); ++col) g.col(col) *= scale(rng);
    std::vector<double> losses(k);
    for (auto& x : losses) x = loss(rng);
    window.push(snapshot_from_gradients(g, t), LossSnapshot(losses, initial, prev, t));
    prev = losses;
  }
  return window;
}

void solver_oracle_equivalence(Check& c) {
  std::mt19937_64 rng(202);
  for (auto kind : {CostKind::EqualGradNorm, CostKind::EqualLoss, CostKind::LowConditionNumber}) {
    double worst_gap = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < 100; ++t) {
      const std::size_t k = t % 2 == 0 ? 2 : 3;
      const auto window = random_window(rng, k, 4);
      SearchOptions options;
      options.seed = static_cast<std::uint64_t>(t);
      const auto report = solve_window(kind, window, WeightVector::uniform(k), options);
      const double grid = oracle::grid_minimum(k, 0.01, kDefaultWeightFloor, [&](const std::vector<double>& w) {
        return window_cost_detail(kind, w, window).value;
      });
      worst_gap = std::max(worst_gap, report.cost_at_w_star - grid);
      c.expect(report.cost_at_w_star <= grid + 1e-3,
               std::string(to_string(kind)) + " instance " + std::to_string(t) + ": solver " +
                   fmt(report.cost_at_w_star, 12) + " vs grid " + fmt(grid, 12));
    }
    c.note(std::string(to_string(kind)) + ": max(solver - grid) = " + fmt(worst_gap, 3));
  }
}

void closed_form_check(Check& c) {
  const auto window = constant_window(orthogonal_with_norms({2.0, 1.0}), {1.0, 1.0}, 50);
  const auto report = solve_window(CostKind::EqualGradNorm, window, WeightVector::uniform(2));
  c.near(report.w_star[0], 2.0 / 3.0, 1e-6, "w*_1");
  c.near(report.w_star[1], 4.0 / 3.0, 1e-6, "w*_2");
  c.near(report.cost_at_w_star, 0.0, 1e-10, "cost at w*");
  c.note("w* = (" + fmt(report.w_star[0], 15) + ", " + fmt(report.w_star[1], 15) + "), cost " +
         fmt(report.cost_at_w_star, 3));
}

void low_cond_balance(Check& c) {
  const auto window = constant_window(orthogonal_with_norms({1.0, 2.0}), {1.0, 1.0}, 50);
  const auto report = solve_window(CostKind::LowConditionNumber, window, WeightVector::uniform(2));
  c.near(report.w_star[0], 4.0 / 3.0, 0.02 * 4.0 / 3.0, "w*_1 within 2%");
  c.near(report.w_star[1], 2.0 / 3.0, 0.02 * 2.0 / 3.0, "w*_2 within 2%");
  const double kappa = condition_number(orthogonal_with_norms({1.0, 2.0}), report.w_star);
  c.expect(kappa <= 1.01, "kappa(w*) = " + fmt(kappa, 10) + " exceeds 1.01");
  c.note("w* = (" + fmt(report.w_star[0], 10) + ", " + fmt(report.w_star[1], 10) + "), kappa " +
         fmt(kappa, 12));
}

void algorithm_structure(Check& c) {
  cli::RunConfig config;
  config.method = "autoscale";
  config.cost = "low-cond";
  config.alpha = 0.2;
  config.tau = 50;
  config.eta = 10;
  config.iters = 25000;
  config.seed = 7;
  std::stringstream trace;
  const auto outcome = cli::execute_run(config, &trace);
  const auto lines = cli::read_trace(trace, "trace");
  c.expect(lines.size() == 25000, "trace has " + std::to_string(lines.size()) + " lines");
  if (lines.size() != 25000 || !outcome.history) return;

  std::set<std::uint64_t> windows;
  for (const auto& line : lines) {
    if (line.window > 0) windows.insert(line.window);
  }
  c.expect(windows.size() == 100, "trace shows " + std::to_string(windows.size()) + " windows");
  c.expect(outcome.history->windows.size() == 100, "history has 100 window solves");

  bool within = true;
  for (std::size_t t = 0; t < 5000; ++t) {
    const auto& w = lines[t].metrics.weights;
    const auto& first = lines[(t / 50) * 50].metrics.weights;
    within = within && lines[t].window == t / 50 + 1 &&
             std::equal(w.begin(), w.end(), first.begin(), first.end(),
                        [](double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); });
    if (t >= 50) {
      const auto& solved = outcome.history->windows[t / 50 - 1].weights;
      within = within && std::equal(w.begin(), w.end(), solved.begin(), solved.end());
    }
  }
  c.expect(within, "weights constant within every exploration window and equal to the previous solve");

  const auto& w_hat = lines[5000].metrics.weights;
  bool fixed = true;
  for (std::size_t t = 5000; t < 25000; ++t) {
    fixed = fixed && lines[t].window == 0 && lines[t].metrics.weights == w_hat;
  }
  c.expect(fixed, "phase-2 weight constant");

  double max_dev = 0.0;
  for (std::size_t k = 0; k < w_hat.size(); ++k) {
    double mean = 0.0;
    for (std::size_t i = 90; i < 100; ++i) mean += outcome.history->windows[i].weights[k];
    mean /= 10.0;
    max_dev = std::max(max_dev, std::abs(mean - w_hat[k]));
  }
  c.expect(max_dev <= 1e-12, "w-hat deviates from the mean of the last 10 window weights by " + fmt(max_dev));
  c.note("windows " + std::to_string(windows.size()) + ", |w-hat - mean| = " + fmt(max_dev, 3));
}

void gcs_invariance(Check& c) {
  const auto problem = make_reference_problem(2024);
  std::mt19937_64 rng(606);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> positive(0.001, 100.0);
  double worst = 0.0;
  for (int point = 0; point < 100; ++point) {
    Eigen::VectorXd theta = problem->initial_params();
    for (auto& x : theta) x += normal(rng);
    TaskEvaluation eval;
    problem->evaluate(theta, static_cast<std::uint64_t>(point), eval);
    const auto snap = snapshot_from_gradients(eval.gradients);
    for (int r = 0; r < 20; ++r) {
      const std::vector<double> w{positive(rng), positive(rng), positive(rng)};
      const auto scaled = snap.scaled(w);
      for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = i + 1; j < 3; ++j) {
          const double diff = std::abs(grad_cosine_similarity(scaled, i, j) - grad_cosine_similarity(snap, i, j));
          worst = std::max(worst, diff);
        }
      }
    }
  }
  c.expect(worst <= 1e-12, "largest cosine change " + fmt(worst));
  c.note("largest cosine change " + fmt(worst, 3));
}

constexpr std::uint64_t kTrendIters = 5000;
constexpr std::uint64_t kTrendSeed = 2024;

void trend_reproduction(Check& c) {
  const auto problem = make_reference_problem(kTrendSeed);
  const auto baselines = task_baselines(*problem, kTrendIters);
  const auto sets = sample_weight_sets(19, 3, kTrendSeed, SamplingScheme::DirichletUniform);
  const auto runs = run_sweep(*problem, sets, kTrendIters, baselines, 1);
  std::vector<double> dm;
  std::vector<double> gms;
  std::vector<double> kappa;
  for (const auto& run : runs) {
    c.expect(run.error.empty(), "run failed: " + run.error);
    dm.push_back(run.delta_m);
    gms.push_back(run.means.gms);
    kappa.push_back(run.means.cond_number);
  }
  const double rho_gms = spearman_correlation(dm, gms);
  const double rho_kappa = spearman_correlation(dm, kappa);
  c.expect(rho_gms <= -0.5, "rho(delta_m, GMS) = " + fmt(rho_gms));
  c.expect(rho_kappa >= 0.5, "rho(delta_m, kappa) = " + fmt(rho_kappa));
  c.note("rho(delta_m, GMS) = " + fmt(rho_gms, 4) + ", rho(delta_m, kappa) = " + fmt(rho_kappa, 4));
}

void beats_unitary(Check& c) {
  const auto problem = make_reference_problem(kTrendSeed);
  const auto baselines = task_baselines(*problem, kTrendIters);
  const auto score = [&](const Eigen::VectorXd& params) {
    return delta_m(loss_scores(problem->task_losses(params), baselines));
  };
  RunOptions quiet;
  quiet.keep_trace = false;
  const double unitary = score(run_fixed_scalarization(*problem, WeightVector::uniform(3), kTrendIters, quiet).params);

  const auto grid = sample_weight_sets(20, 3, kTrendSeed, SamplingScheme::LogUniformGrid);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& run : run_sweep(*problem, grid, kTrendIters, baselines, 1)) best = std::min(best, run.delta_m);

  std::ostringstream summary;
  summary.precision(5);
  summary << "unitary " << unitary << ", grid best " << best;
  for (auto kind : {CostKind::EqualGradNorm, CostKind::EqualLoss, CostKind::LowConditionNumber}) {
    AutoScaleConfig config;
    config.total_iters = kTrendIters;
    config.cost_kind = kind;
    config.seed = kTrendSeed;
    const double dm = score(run_autoscale(*problem, config, quiet).params);
    summary << ", " << to_string(kind) << " " << dm;
    c.expect(dm < unitary, std::string(to_string(kind)) + " delta_m " + fmt(dm) + " not below unitary " + fmt(unitary));
    if (kind == CostKind::LowConditionNumber) {
      c.expect(dm <= best + 0.1 * std::abs(best),
               "low-cond delta_m " + fmt(dm) + " not within 10% of grid best " + fmt(best));
    }
  }
  c.note(summary.str());
}

void evaluation_metrics(Check& c) {
  const auto drop = [](double d) { return TaskScore{100.0 + d, 100.0, false}; };
  c.near(delta_m(std::vector<TaskScore>{{2.0, 2.0, false}, {3.0, 3.0, true}}), 0.0, 0.0, "no change");
  c.near(delta_m(std::vector<TaskScore>{{1.1 * 0.8, 0.8, true}}), -10.0, 1e-12, "higher-better +10%");
  c.near(delta_m(std::vector<TaskScore>{{1.1, 1.0, false}, {1.8, 2.0, false}}), 0.0, 1e-12, "losses cancel");
  c.near(delta_m_deg(std::vector<TaskScore>{drop(-2.0), drop(-1.0)}), 0.0, 0.0, "all improved");
  c.near(delta_m_deg(std::vector<TaskScore>{drop(5.0), drop(-3.0)}), 5.0, 1e-12, "drops (+5,-3)");
  c.near(delta_m_deg(std::vector<TaskScore>{drop(2.0), drop(3.0), drop(-10.0)}), 5.0, 1e-12, "drops (+2,+3,-10)");
  const auto mr = mean_rank({{1.0, 0.9}, {2.0, 0.3}, {3.0, 0.95}}, {false, true});
  c.near(mr[0], 1.5, 0.0, "ranks (1,2) give MR 1.5");
  const auto best = mean_rank({{1.0, 1.0}, {2.0, 3.0}}, {false, false});
  c.near(best[0], 1.0, 0.0, "best everywhere gives MR 1");
  const auto tied = mean_rank({{0.5}, {0.5}}, {false});
  c.expect(tied[0] == 1.5 && tied[1] == 1.5, "tie shares rank 1.5");
  c.near(spearman_correlation(std::vector<double>{1, 2, 3}, std::vector<double>{2, 1, 3}), 0.5, 1e-15,
         "spearman example");

  std::mt19937_64 rng(909);
  std::uniform_int_distribution<int> kd(1, 8);
  std::uniform_real_distribution<double> base(0.1, 10.0);
  std::uniform_real_distribution<double> factor(0.3, 1.7);
  std::bernoulli_distribution higher(0.5);
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const auto k = kd(rng);
    std::vector<TaskScore> scores;
    double negative = 0.0;
    for (int i = 0; i < k; ++i) {
      const double b = base(rng);
      scores.push_back(TaskScore{b * factor(rng), b, higher(rng)});
      const auto& s = scores.back();
      const double d = (s.higher_is_better ? -1.0 : 1.0) * (s.value - s.baseline) / s.baseline * 100.0;
      if (d < 0.0) negative -= d;
    }
    const double gap = std::abs(static_cast<double>(k) * delta_m(scores) - (delta_m_deg(scores) - negative));
    worst = std::max(worst, gap);
  }
  c.expect(worst <= 1e-10, "identity violated by " + fmt(worst));
  c.note("largest identity residual " + fmt(worst, 3));
}

TraceLine random_line(std::mt19937_64& rng) {
  const auto random_double = [&]() -> double {
    switch (rng() % 8) {
      case 0: return std::bit_cast<double>(rng());
      case 1: return std::numeric_limits<double>::quiet_NaN();
      case 2: return (rng() & 1) ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      case 3: return -0.0;
      case 4: return std::numeric_limits<double>::denorm_min() * static_cast<double>(rng() % 100);
      default: return std::ldexp(static_cast<double>(rng() >> 11), static_cast<int>(rng() % 200) - 150);
    }
  };
  const auto vec = [&](std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = random_double();
    return v;
  };
  const std::size_t k = 1 + rng() % 5;
  TraceLine line;
  line.meta = {"run-" + std::to_string(rng() % 100), "autoscale", "low-cond", "none", rng(), "0123abcd"};
  line.window = rng() % 101;
  line.metrics.iter = rng();
  line.metrics.weights = vec(k);
  line.losses = vec(k);
  line.grad_norms = vec(k);
  line.gram_upper = vec(k * (k + 1) / 2);
  line.metrics.gms_mean = random_double();
  line.metrics.gcs_mean = random_double();
  line.metrics.cond_number = random_double();
  line.metrics.ilr_per_task = vec(k);
  line.metrics.ilr_std = random_double();
  line.metrics.ldr_per_task = vec(k);
  line.metrics.rl_per_task = vec(k);
  line.metrics.rl_std = random_double();
  line.metrics.degenerate_flags = static_cast<std::uint32_t>(rng() % 64);
  return line;
}

void reproducibility(Check& c) {
  for (const std::string method : {"autoscale", "rlw", "unitary"}) {
    cli::RunConfig config;
    config.method = method;
    config.iters = 2500;
    std::ostringstream a;
    std::ostringstream b;
    cli::execute_run(config, &a);
    cli::execute_run(config, &b);
    c.expect(!a.str().empty() && a.str() == b.str(), method + " traces differ between identical runs");
  }
  std::mt19937_64 rng(1010);
  std::size_t mismatches = 0;
  for (int t = 0; t < 10000; ++t) {
    const auto line = random_line(rng);
    if (!cli::bitwise_equal(line, cli::parse_trace_line(cli::serialize_trace_line(line)))) ++mismatches;
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " of 10000 records changed in a round trip");
  c.note("byte-identical traces for autoscale, rlw, unitary; 10000 lossless round trips");
}

struct Criterion {
  int number;
  const char* title;
  double budget_seconds;
  void (*run)(Check&);
};

}  // namespace

int main() {
  cli::set_log_level(cli::LogLevel::Error);
  const std::vector<Criterion> criteria{
      {1, "metric formula suite", 10.0, metric_formula_suite},
      {2, "solver matches simplex grid", 120.0, solver_oracle_equivalence},
      {3, "equal-grad closed form", 0.0, closed_form_check},
      {4, "low-cond balance", 0.0, low_cond_balance},
      {5, "two-phase structure", 0.0, algorithm_structure},
      {6, "cosine similarity invariance", 0.0, gcs_invariance},
      {7, "trend reproduction", 300.0, trend_reproduction},
      {8, "autoscale beats unitary", 0.0, beats_unitary},
      {9, "evaluation metrics", 0.0, evaluation_metrics},
      {10, "reproducibility and trace round trip", 0.0, reproducibility},
  };
  int failed = 0;
  for (const auto& criterion : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      criterion.run(check);
    } catch (const std::exception& e) {
      check.fail_with(std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criterion.budget_seconds > 0.0 && seconds > criterion.budget_seconds) {
      check.fail_with("took " + fmt(seconds, 3) + " s, budget " + fmt(criterion.budget_seconds, 3) + " s");
    }
    const bool ok = check.ok();
    failed += ok ? 0 : 1;
    std::printf("%s %2d %s (%zu checks, %.2f s)\n", ok ? "PASS" : "FAIL", criterion.number, criterion.title,
                check.checks(), seconds);
    for (const auto& note : check.notes()) std::printf("       %s\n", note.c_str());
    for (const auto& failure : check.failures()) std::printf("       failed: %s\n", failure.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
