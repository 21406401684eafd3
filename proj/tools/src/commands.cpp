// SPDX-License-Identifier: Apache-2.0
#include "autoscale_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include "autoscale/costs.hpp"
#include "autoscale/error.hpp"
#include "autoscale/random.hpp"
#include "autoscale_cli/csv.hpp"
#include "autoscale_cli/log.hpp"

namespace autoscale::cli {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

TraceMeta make_meta(const RunConfig& config, const std::string& run_id, const std::string& method) {
  const bool has_cost = method == "autoscale";
  const bool sampled = method == "sweep";
  return TraceMeta{run_id,
                   method,
                   has_cost ? config.cost : "none",
                   sampled ? config.scheme : "none",
                   config.seed,
                   config_hash(config)};
}

std::uint64_t stl_iterations(const RunConfig& config) {
  return config.stl_iters == 0 ? config.iters : config.stl_iters;
}

json window_json(const WindowSolve& w) {
  return json{{"window", w.window},
              {"first_iter", w.first_iter},
              {"trained_with", std::vector<double>(w.trained_with.begin(), w.trained_with.end())},
              {"weights", std::vector<double>(w.weights.begin(), w.weights.end())},
              {"cost_before", w.cost_before},
              {"cost_after", w.cost_after},
              {"skipped", w.skipped},
              {"converged", w.converged},
              {"solver", std::string(to_string(w.method))}};
}

void print_scores(std::ostream& out, const RunOutcome& outcome) {
  out << std::setprecision(8);
  out << "task  final_loss  baseline  drop_percent\n";
  for (std::size_t k = 0; k < outcome.scores.size(); ++k) {
    out << k + 1 << "  " << outcome.final_losses[k] << "  " << outcome.baselines[k] << "  "
        << signed_task_drop(outcome.scores[k]) << '\n';
  }
  out << "delta_m " << outcome.delta_m << "\n";
  out << "delta_m_deg " << outcome.delta_m_deg << "\n";
}

}  // namespace

RunOutcome execute_run(const RunConfig& config, std::ostream* trace) {
  validate(config);
  if (config.method == "sweep") throw InvalidArgument("use the sweep command for method sweep");
  const auto problem = build_problem(config);
  const auto k = problem->num_tasks();
  const std::string run_id = config.run_id.empty() ? config.method : config.run_id;
  const TraceMeta meta = make_meta(config, run_id, config.method);

  RunOutcome outcome;
  std::optional<TraceWriter> writer;
  if (trace != nullptr) writer.emplace(*trace);
  std::uint64_t explore = 0;
  if (config.method == "autoscale") explore = autoscale_config(config).exploration_iters();

  RunOptions options;
  options.keep_trace = false;
  options.sink = [&](const IterationRecord& record) {
    ++outcome.trace_lines;
    if (!writer) return;
    const auto t = record.metrics.iter;
    const std::uint64_t window = t < explore ? t / config.tau + 1 : 0;
    writer->write(make_trace_line(meta, record, window));
  };

  outcome.baselines = task_baselines(*problem, stl_iterations(config));
  Eigen::VectorXd params;
  if (config.method == "autoscale") {
    auto result = run_autoscale(*problem, autoscale_config(config), options);
    params = std::move(result.params);
    outcome.history = std::move(result.history);
  } else if (config.method == "unitary") {
    params = run_fixed_scalarization(*problem, WeightVector::uniform(k), config.iters, options).params;
  } else if (config.method == "fixed") {
    if (config.weights.size() != k) {
      throw InvalidArgument("weights has " + std::to_string(config.weights.size()) +
                            " entries for " + std::to_string(k) + " tasks");
    }
    const auto w = make_weight_vector(config.weights, config.weight_floor);
    params = run_fixed_scalarization(*problem, w, config.iters, options).params;
  } else if (config.method == "rlw") {
    const auto seed = config.seed;
    const auto floor = config.weight_floor;
    params = run_weight_schedule(
                 *problem,
                 [&](std::uint64_t t) { return random_loss_weighting_step(k, seed, t, floor); },
                 config.iters, options)
                 .params;
  } else {
    // Single-task learning: the per-task best losses are the result.
    outcome.final_losses = run_stl_baselines(*problem, config.iters);
  }
  if (config.method != "stl") outcome.final_losses = problem->task_losses(params);
  outcome.scores = loss_scores(outcome.final_losses, outcome.baselines);
  outcome.delta_m = delta_m(outcome.scores);
  outcome.delta_m_deg = delta_m_deg(outcome.scores);
  return outcome;
}

int cmd_run(const RunConfig& config, std::ostream& out) {
  validate(config);
  if (config.method == "sweep") return cmd_sweep(config, out);
  log(LogLevel::Info, "run " + config.method + " on " + config.problem + " for " +
                          std::to_string(config.iters) + " iterations");
  std::ofstream trace_file;
  if (!config.trace.empty()) trace_file = open_output(config.trace);
  const auto outcome = execute_run(config, config.trace.empty() ? nullptr : &trace_file);
  if (trace_file.is_open()) {
    trace_file.close();
    if (!trace_file) throw Error("failed writing trace " + config.trace);
    log(LogLevel::Info, "wrote " + std::to_string(outcome.trace_lines) + " trace lines to " + config.trace);
  }

  print_scores(out, outcome);
  if (outcome.history) {
    const auto& h = *outcome.history;
    out << "windows " << h.windows.size() << "\nfinal_weight";
    for (double w : h.final_weight) out << ' ' << w;
    out << '\n';
  }

  if (!config.summary.empty()) {
    json summary{{"run_id", config.run_id.empty() ? config.method : config.run_id},
                 {"method", config.method},
                 {"config_hash", config_hash(config)},
                 {"config", to_json(config)},
                 {"final_losses", outcome.final_losses},
                 {"baselines", outcome.baselines},
                 {"delta_m", outcome.delta_m},
                 {"delta_m_deg", outcome.delta_m_deg}};
    if (outcome.history) {
      json windows = json::array();
      for (const auto& w : outcome.history->windows) windows.push_back(window_json(w));
      summary["windows"] = std::move(windows);
      const auto& fw = outcome.history->final_weight;
      summary["final_weight"] = std::vector<double>(fw.begin(), fw.end());
    }
    auto file = open_output(config.summary);
    file << summary.dump(2) << '\n';
  }
  return 0;
}

std::filesystem::path sweep_trace_path(const std::string& pattern, const std::string& run_id) {
  const auto marker = pattern.find("{run}");
  if (marker != std::string::npos) {
    std::string path = pattern;
    path.replace(marker, 5, run_id);
    return path;
  }
  const std::filesystem::path p(pattern);
  return p.parent_path() / (p.stem().string() + "-" + run_id + p.extension().string());
}

std::string sweep_run_id(const std::string& prefix, std::size_t index, std::size_t count) {
  const auto digits = std::max<std::size_t>(2, std::to_string(count - 1).size());
  std::ostringstream s;
  s << prefix << '-' << std::setw(static_cast<int>(digits)) << std::setfill('0') << index;
  return s.str();
}

void write_sweep_summary(std::ostream& out, const std::vector<std::string>& run_ids,
                         const std::vector<SweepRun>& runs) {
  std::size_t k = 0;
  for (const auto& r : runs) k = std::max(k, r.weights.size());
  std::vector<std::string> header{"rank", "run_id"};
  for (std::size_t i = 0; i < k; ++i) header.push_back("w_" + std::to_string(i + 1));
  for (const char* name : {"delta_m", "delta_m_deg", "gms", "gcs", "cond", "ilr_std", "rl_std", "error"}) {
    header.emplace_back(name);
  }
  out << csv_row(header);

  std::vector<std::size_t> order(runs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const bool fa = !runs[a].error.empty();
    const bool fb = !runs[b].error.empty();
    if (fa != fb) return fb;
    return !fa && runs[a].delta_m < runs[b].delta_m;
  });
  std::size_t rank = 0;
  for (auto j : order) {
    const auto& r = runs[j];
    std::vector<std::string> row{r.error.empty() ? std::to_string(++rank) : "", run_ids[j]};
    for (std::size_t i = 0; i < k; ++i) row.push_back(i < r.weights.size() ? csv_number(r.weights[i]) : "");
    for (double v : {r.delta_m, r.delta_m_deg, r.means.gms, r.means.gcs, r.means.cond_number,
                     r.means.ilr_std, r.means.rl_std}) {
      row.push_back(csv_number(v));
    }
    std::string error = r.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '"', '\'');
    row.push_back(error);
    out << csv_row(row);
  }
}

int cmd_sweep(const RunConfig& config, std::ostream& out) {
  validate(config);
  if (config.count < 2) throw InvalidArgument("a sweep needs count >= 2");
  const auto problem = build_problem(config);
  const auto k = problem->num_tasks();
  SamplingOptions sampling;
  sampling.log10_span = config.log10_span;
  sampling.floor = config.weight_floor;
  const auto weight_sets =
      sample_weight_sets(config.count, k, config.seed, parse_sampling_scheme(config.scheme), sampling);
  const auto baselines = task_baselines(*problem, stl_iterations(config));
  const std::string prefix = config.run_id.empty() ? "sweep" : config.run_id;

  std::vector<std::string> run_ids;
  for (std::size_t j = 0; j < weight_sets.size(); ++j) {
    run_ids.push_back(sweep_run_id(prefix, j, weight_sets.size()));
  }
  log(LogLevel::Info, "sweep of " + std::to_string(weight_sets.size()) + " weight sets (" +
                          config.scheme + ") on " + config.problem);

  // One writer per run; files live as long as the sweep.
  std::vector<std::unique_ptr<std::ofstream>> files(weight_sets.size());
  std::vector<std::unique_ptr<TraceWriter>> writers(weight_sets.size());
  if (!config.trace.empty()) {
    for (std::size_t j = 0; j < weight_sets.size(); ++j) {
      files[j] = std::make_unique<std::ofstream>(open_output(sweep_trace_path(config.trace, run_ids[j])));
      writers[j] = std::make_unique<TraceWriter>(*files[j]);
    }
  }
  const auto sink_for = [&](std::size_t j) -> IterationSink {
    if (!writers[j]) return {};
    const auto meta = make_meta(config, run_ids[j], "sweep");
    return [meta, writer = writers[j].get()](const IterationRecord& r) {
      writer->write(make_trace_line(meta, r));
    };
  };
  const auto runs = run_sweep(*problem, weight_sets, config.iters, baselines,
                              static_cast<std::size_t>(config.jobs), sink_for);
  for (auto& f : files) {
    if (f) f->close();
  }

  std::size_t failures = 0;
  for (std::size_t j = 0; j < runs.size(); ++j) {
    if (!runs[j].error.empty()) {
      ++failures;
      log(LogLevel::Error, run_ids[j] + " failed: " + runs[j].error);
    }
  }
  if (!config.summary.empty()) {
    auto file = open_output(config.summary);
    write_sweep_summary(file, run_ids, runs);
  } else {
    write_sweep_summary(out, run_ids, runs);
  }

  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < runs.size(); ++j) {
    if (runs[j].error.empty() && (!best || runs[j].delta_m < runs[*best].delta_m)) best = j;
  }
  if (best) {
    out << std::setprecision(8) << "best " << run_ids[*best] << " delta_m " << runs[*best].delta_m
        << " weights";
    for (double w : runs[*best].weights) out << ' ' << w;
    out << '\n';
  }
  return failures == 0 ? 0 : 1;
}

const std::vector<std::string>& analyzable_metrics() {
  static const std::vector<std::string> names{"gms", "gcs", "cond", "ilr_std", "rl_std"};
  return names;
}

double metric_value(const TraceLine& line, const std::string& metric) {
  const auto& m = line.metrics;
  if (metric == "gms") return m.gms_mean;
  if (metric == "gcs") return m.gcs_mean;
  if (metric == "cond") return m.cond_number;
  if (metric == "ilr_std") return m.ilr_std;
  if (metric == "rl_std") return m.rl_std;
  throw InvalidArgument("unknown metric '" + metric + "' (expected gms, gcs, cond, ilr_std or rl_std)");
}

std::vector<double> smooth(const std::vector<double>& values, std::size_t width) {
  if (width <= 1) return values;
  std::vector<double> out(values.size(), kNaN);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isnan(values[i])) {
      sum += values[i];
      ++count;
    }
    if (i >= width && !std::isnan(values[i - width])) {
      sum -= values[i - width];
      --count;
    }
    if (count > 0) out[i] = sum / static_cast<double>(count);
  }
  return out;
}

std::size_t verify_trace(const std::vector<TraceLine>& lines) {
  std::size_t mismatches = 0;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> history;
  for (const auto& line : lines) {
    auto [it, fresh] = history.try_emplace(line.meta.run_id, line.losses, line.losses);
    auto& [initial, prev] = it->second;
    const LossSnapshot loss(line.losses, initial, prev, line.metrics.iter);
    prev = line.losses;
    const auto weights = WeightVector::from_feasible(line.metrics.weights, 0.0);
    TraceLine recomputed = line;
    recomputed.metrics = metric_record(snapshot_of(line), loss, weights);
    if (!bitwise_equal(recomputed, line)) ++mismatches;
  }
  return mismatches;
}

int cmd_analyze(const AnalyzeOptions& options, std::ostream& out) {
  if (options.traces.empty()) throw InvalidArgument("analyze needs at least one trace file");
  auto metrics = options.metrics.empty() ? analyzable_metrics() : options.metrics;
  for (const auto& m : metrics) {
    if (std::find(analyzable_metrics().begin(), analyzable_metrics().end(), m) ==
        analyzable_metrics().end()) {
      throw InvalidArgument("unknown metric '" + m + "' (expected gms, gcs, cond, ilr_std or rl_std)");
    }
  }

  // Runs in order of first appearance.
  std::vector<std::string> run_order;
  std::map<std::string, std::vector<TraceLine>> runs;
  for (const auto& path : options.traces) {
    auto in = open_input(path);
    for (auto& line : read_trace(in, path.string())) {
      auto& bucket = runs[line.meta.run_id];
      if (bucket.empty()) run_order.push_back(line.meta.run_id);
      bucket.push_back(std::move(line));
    }
  }

  if (options.verify) {
    std::size_t total = 0;
    for (const auto& id : run_order) total += verify_trace(runs[id]);
    if (total > 0) {
      throw Error(std::to_string(total) + " trace lines differ from their recomputed metrics");
    }
    out << "verify ok\n";
  }

  std::filesystem::create_directories(options.output_dir);
  std::size_t k = 0;
  for (const auto& id : run_order) {
    for (const auto& line : runs[id]) k = std::max(k, line.metrics.weights.size());
  }

  {
    auto file = open_output(options.output_dir / "trajectory.csv");
    std::vector<std::string> header{"run_id", "iter", "window"};
    header.insert(header.end(), metrics.begin(), metrics.end());
    for (std::size_t i = 0; i < k; ++i) header.push_back("w_" + std::to_string(i + 1));
    file << csv_row(header);
    for (const auto& id : run_order) {
      const auto& lines = runs[id];
      std::vector<std::vector<double>> columns;
      for (const auto& m : metrics) {
        std::vector<double> v;
        v.reserve(lines.size());
        for (const auto& line : lines) v.push_back(metric_value(line, m));
        columns.push_back(smooth(v, options.smoothing));
      }
      for (std::size_t r = 0; r < lines.size(); ++r) {
        std::vector<std::string> row{id, std::to_string(lines[r].metrics.iter),
                                     std::to_string(lines[r].window)};
        for (const auto& c : columns) row.push_back(csv_number(c[r]));
        const auto& w = lines[r].metrics.weights;
        for (std::size_t i = 0; i < k; ++i) row.push_back(i < w.size() ? csv_number(w[i]) : "");
        file << csv_row(row);
      }
    }
  }

  std::map<std::string, double> delta;
  if (!options.sweep_summary.empty()) {
    auto in = open_input(options.sweep_summary);
    const auto table = read_csv(in, options.sweep_summary.string());
    const auto id_col = table.column("run_id");
    const auto dm_col = table.column("delta_m");
    for (const auto& row : table.rows) {
      delta[row[id_col]] = parse_number(row[dm_col], options.sweep_summary.string());
    }
  }

  std::map<std::string, std::vector<double>> means;  // metric -> per run
  std::vector<double> run_delta;
  {
    auto file = open_output(options.output_dir / "run_means.csv");
    std::vector<std::string> header{"run_id", "iters", "delta_m"};
    header.insert(header.end(), metrics.begin(), metrics.end());
    file << csv_row(header);
    for (const auto& id : run_order) {
      const auto& lines = runs[id];
      const auto found = delta.find(id);
      const double dm = found == delta.end() ? kNaN : found->second;
      std::vector<std::string> row{id, std::to_string(lines.size()), csv_number(dm)};
      for (const auto& m : metrics) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& line : lines) {
          const double v = metric_value(line, m);
          if (std::isnan(v)) continue;
          sum += v;
          ++n;
        }
        const double mean = n == 0 ? kNaN : sum / static_cast<double>(n);
        row.push_back(csv_number(mean));
        if (!std::isnan(dm)) means[m].push_back(mean);
      }
      if (!std::isnan(dm)) run_delta.push_back(dm);
      file << csv_row(row);
    }
  }

  if (!options.sweep_summary.empty()) {
    auto file = open_output(options.output_dir / "correlations.csv");
    file << csv_row({"metric", "spearman_rho", "runs"});
    for (const auto& m : metrics) {
      std::vector<double> x;
      std::vector<double> y;
      for (std::size_t r = 0; r < run_delta.size(); ++r) {
        if (std::isnan(means[m][r])) continue;
        x.push_back(run_delta[r]);
        y.push_back(means[m][r]);
      }
      double rho = kNaN;
      try {
        rho = spearman_correlation(x, y);
      } catch (const InvalidArgument& e) {
        log(LogLevel::Info, "no correlation for " + m + ": " + e.what());
      }
      file << csv_row({m, csv_number(rho), std::to_string(x.size())});
      out << "rho(delta_m, " << m << ") = " << std::setprecision(6) << rho << '\n';
    }
  }
  out << "analyzed " << run_order.size() << " runs into " << options.output_dir.string() << '\n';
  return 0;
}

std::vector<EvalRow> evaluate_scores(const std::vector<std::filesystem::path>& score_files) {
  std::vector<std::string> methods;
  std::vector<std::string> tasks;
  std::map<std::string, std::map<std::string, TaskScore>> table;
  std::map<std::string, bool> direction;
  for (const auto& path : score_files) {
    auto in = open_input(path);
    const auto csv = read_csv(in, path.string());
    const auto cm = csv.column("method");
    const auto ct = csv.column("task");
    const auto cv = csv.column("value");
    const auto cb = csv.column("baseline");
    const auto ch = csv.column("higher_is_better");
    for (const auto& row : csv.rows) {
      const auto& method = row[cm];
      const auto& task = row[ct];
      if (row[ch] != "0" && row[ch] != "1") {
        throw ParseError(path.string() + ": higher_is_better must be 0 or 1");
      }
      const bool higher = row[ch] == "1";
      if (std::find(methods.begin(), methods.end(), method) == methods.end()) methods.push_back(method);
      if (std::find(tasks.begin(), tasks.end(), task) == tasks.end()) tasks.push_back(task);
      const auto [dir, fresh_task] = direction.try_emplace(task, higher);
      if (dir->second != higher) {
        throw ParseError(path.string() + ": task '" + task + "' has conflicting directions");
      }
      const TaskScore score{parse_number(row[cv], path.string()),
                            parse_number(row[cb], path.string()), higher};
      if (!table[method].try_emplace(task, score).second) {
        throw ParseError(path.string() + ": duplicate score for " + method + "/" + task);
      }
    }
  }
  if (methods.empty()) throw InvalidArgument("no scores found");

  std::vector<std::vector<double>> matrix;
  std::vector<bool> higher;
  for (const auto& t : tasks) higher.push_back(direction[t]);
  std::vector<EvalRow> rows;
  for (const auto& m : methods) {
    std::vector<TaskScore> scores;
    std::vector<double> values;
    for (const auto& t : tasks) {
      const auto found = table[m].find(t);
      if (found == table[m].end()) throw InvalidArgument("method " + m + " has no score for task " + t);
      scores.push_back(found->second);
      values.push_back(found->second.value);
    }
    matrix.push_back(values);
    rows.push_back({m, delta_m(scores), delta_m_deg(scores), kNaN});
  }
  if (methods.size() >= 2) {
    const auto ranks = mean_rank(matrix, higher);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].mean_rank = ranks[i];
  }
  return rows;
}

int cmd_eval(const EvalOptions& options, std::ostream& out) {
  if (options.score_files.empty()) throw InvalidArgument("eval needs at least one score file");
  const auto rows = evaluate_scores(options.score_files);
  std::ostringstream csv;
  csv << csv_row({"method", "delta_m", "delta_m_deg", "mean_rank"});
  for (const auto& r : rows) {
    csv << csv_row({r.method, csv_number(r.delta_m), csv_number(r.delta_m_deg), csv_number(r.mean_rank)});
  }
  out << csv.str();
  if (!options.output.empty()) {
    auto file = open_output(options.output);
    file << csv.str();
  }
  return 0;
}

}  // namespace autoscale::cli
