// SPDX-License-Identifier: Apache-2.0
#include "autoscale/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>

#include "autoscale/error.hpp"
#include "autoscale/random.hpp"
#include "autoscale/scheduler.hpp"

namespace autoscale {
namespace {

bool same_weights(const WeightVector& a, const WeightVector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > 1e-12) return false;
  }
  return true;
}

std::vector<double> log_weights_to_raw(std::span<const double> log10_w) {
  std::vector<double> raw(log10_w.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = std::pow(10.0, log10_w[i]);
  return raw;
}

}  // namespace

std::vector<double> run_stl_baselines(const MultiTaskProblem& problem, std::uint64_t iterations) {
  const auto k = problem.num_tasks();
  std::vector<double> best(k, std::numeric_limits<double>::infinity());
  for (std::size_t task = 0; task < k; ++task) {
    std::vector<double> one_hot(k, 0.0);
    one_hot[task] = 1.0;
    train_with_raw_weights(problem, one_hot, iterations,
                           [&](std::uint64_t, const Eigen::VectorXd& params) {
                             best[task] = std::min(best[task], problem.task_losses(params)[task]);
                           });
  }
  return best;
}

std::string_view to_string(SamplingScheme scheme) {
  return scheme == SamplingScheme::DirichletUniform ? "dirichlet-uniform" : "log-uniform-grid";
}

SamplingScheme parse_sampling_scheme(std::string_view name) {
  if (name == "dirichlet-uniform") return SamplingScheme::DirichletUniform;
  if (name == "log-uniform-grid") return SamplingScheme::LogUniformGrid;
  throw InvalidArgument("unknown sampling scheme '" + std::string(name) +
                        "' (expected dirichlet-uniform or log-uniform-grid)");
}

std::vector<WeightVector> sample_weight_sets(std::size_t count, std::size_t num_tasks,
                                             std::uint64_t seed, SamplingScheme scheme,
                                             const SamplingOptions& options) {
  if (count < 2) throw InvalidArgument("need at least two weight sets");
  if (num_tasks < 2) throw InvalidArgument("need at least two tasks");
  if (!(options.log10_span > 0.0)) throw InvalidArgument("log span must be positive");

  auto rng = make_rng(seed, SeedStream::WeightSampling);
  std::vector<WeightVector> out;
  out.reserve(count);
  const auto k = num_tasks;

  const auto accept = [&](const std::vector<double>& raw) {
    auto w = make_weight_vector(raw, options.floor);
    for (const auto& existing : out) {
      if (same_weights(existing, w)) return;
    }
    out.push_back(std::move(w));
  };

  if (scheme == SamplingScheme::LogUniformGrid && k == 2) {
    for (std::size_t j = 0; j < count; ++j) {
      const double r = options.log10_span *
                       (2.0 * static_cast<double>(j) / static_cast<double>(count - 1) - 1.0);
      const std::vector<double> log_w{0.5 * r, -0.5 * r};
      accept(log_weights_to_raw(log_w));
    }
    return out;
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> exponential(1.0);
  while (out.size() < count) {
    const auto batch = count - out.size();
    if (scheme == SamplingScheme::DirichletUniform) {
      for (std::size_t j = 0; j < batch; ++j) {
        std::vector<double> raw(k);
        for (auto& x : raw) x = exponential(rng);
        accept(raw);
      }
    } else {
      // Latin hypercube: every coordinate visits each of the `batch` strata
      // exactly once.
      std::vector<std::vector<double>> log_w(batch, std::vector<double>(k));
      for (std::size_t c = 0; c < k; ++c) {
        std::vector<std::size_t> strata(batch);
        std::iota(strata.begin(), strata.end(), 0);
        std::shuffle(strata.begin(), strata.end(), rng);
        for (std::size_t j = 0; j < batch; ++j) {
          const double u = (static_cast<double>(strata[j]) + unit(rng)) / static_cast<double>(batch);
          log_w[j][c] = options.log10_span * (2.0 * u - 1.0);
        }
      }
      for (const auto& lw : log_w) accept(log_weights_to_raw(lw));
    }
  }
  return out;
}

WeightVector random_loss_weighting_step(std::size_t num_tasks, std::uint64_t seed,
                                        std::uint64_t iter, double floor) {
  if (num_tasks < 2) throw InvalidArgument("need at least two tasks");
  auto rng = make_rng(seed, SeedStream::RandomWeighting, iter);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(num_tasks);
  for (auto& x : z) x = normal(rng);
  const double zmax = *std::max_element(z.begin(), z.end());
  for (auto& x : z) x = std::exp(x - zmax);
  return make_weight_vector(z, floor);
}

std::vector<TaskScore> loss_scores(std::span<const double> losses,
                                   std::span<const double> baselines) {
  if (losses.size() != baselines.size()) {
    throw InvalidArgument("loss and baseline counts differ");
  }
  std::vector<TaskScore> scores(losses.size());
  for (std::size_t k = 0; k < losses.size(); ++k) scores[k] = {losses[k], baselines[k], false};
  return scores;
}

void MetricMeanAccumulator::Sum::add(double x) {
  if (std::isnan(x)) return;
  total += x;
  ++count;
}

double MetricMeanAccumulator::Sum::mean() const {
  return count == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : total / static_cast<double>(count);
}

void MetricMeanAccumulator::add(const MetricRecord& record) {
  gms_.add(record.gms_mean);
  gcs_.add(record.gcs_mean);
  cond_.add(record.cond_number);
  ilr_std_.add(record.ilr_std);
  rl_std_.add(record.rl_std);
}

MetricMeans MetricMeanAccumulator::means() const {
  return {gms_.mean(), gcs_.mean(), cond_.mean(), ilr_std_.mean(), rl_std_.mean()};
}

std::vector<SweepRun> run_sweep(const MultiTaskProblem& problem,
                                std::span<const WeightVector> weight_sets, std::uint64_t iterations,
                                std::span<const double> baselines, std::size_t jobs,
                                const std::function<IterationSink(std::size_t)>& sink_for) {
  if (baselines.size() != problem.num_tasks()) {
    throw InvalidArgument("baseline count does not match the task count");
  }
  std::vector<std::optional<SweepRun>> slots(weight_sets.size());
  const auto run_one = [&](std::size_t j) {
    MetricMeanAccumulator acc;
    RunOptions options;
    options.keep_trace = false;
    IterationSink forward = sink_for ? sink_for(j) : IterationSink{};
    options.sink = [&](const IterationRecord& r) {
      acc.add(r.metrics);
      if (forward) forward(r);
    };
    const auto trained = run_fixed_scalarization(problem, weight_sets[j], iterations, options);
    auto losses = problem.task_losses(trained.params);
    const auto scores = loss_scores(losses, baselines);
    slots[j] = SweepRun{weight_sets[j], std::move(losses), delta_m(scores), delta_m_deg(scores),
                       acc.means(), {}};
  };

  const auto guarded = [&](std::size_t j) {
    try {
      run_one(j);
    } catch (const std::exception& e) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      slots[j] = SweepRun{weight_sets[j], {}, nan, nan, {nan, nan, nan, nan, nan}, e.what()};
    }
  };

  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(weight_sets.size(), 1));
  if (jobs == 1) {
    for (std::size_t j = 0; j < weight_sets.size(); ++j) guarded(j);
  } else {
    std::vector<std::thread> workers;
    for (std::size_t worker = 0; worker < jobs; ++worker) {
      workers.emplace_back([&, worker] {
        for (std::size_t j = worker; j < weight_sets.size(); j += jobs) guarded(j);
      });
    }
    for (auto& t : workers) t.join();
  }
  std::vector<SweepRun> runs;
  runs.reserve(slots.size());
  for (auto& s : slots) runs.push_back(std::move(*s));
  return runs;
}

std::vector<double> task_baselines(const MultiTaskProblem& problem, std::uint64_t iterations) {
  if (auto optima = problem.reference_optima()) return *optima;
  return run_stl_baselines(problem, iterations);
}

}  // namespace autoscale
