// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "autoscale/baselines.hpp"
#include "autoscale/eval.hpp"
#include "autoscale/scheduler.hpp"
#include "autoscale_cli/config.hpp"
#include "autoscale_cli/trace.hpp"

namespace autoscale::cli {

/// Result of one configured training run.
struct RunOutcome {
  std::vector<double> final_losses;  ///< noise-free
  std::vector<double> baselines;
  std::vector<TaskScore> scores;
  double delta_m = 0.0;
  double delta_m_deg = 0.0;
  std::optional<WeightHistory> history;  ///< autoscale only
  std::size_t trace_lines = 0;
};

/// Executes a non-sweep method, writing trace lines to `trace` when set.
RunOutcome execute_run(const RunConfig& config, std::ostream* trace);

/// `run`: validates, executes, writes the trace and summary files named in
/// the config and prints per-task scores. Returns the exit status.
int cmd_run(const RunConfig& config, std::ostream& out);

/// Where run `run_id` of a sweep writes its trace: `{run}` in the pattern is
/// replaced, otherwise the id is appended to the file stem.
std::filesystem::path sweep_trace_path(const std::string& pattern, const std::string& run_id);

/// Run ids of a sweep: <prefix>-00, <prefix>-01, ...
std::string sweep_run_id(const std::string& prefix, std::size_t index, std::size_t count);

/// Summary table of a sweep, best Delta m first; failed runs last.
void write_sweep_summary(std::ostream& out, const std::vector<std::string>& run_ids,
                         const std::vector<SweepRun>& runs);

/// `sweep`: N fixed scalarizations with sampled weights. Per-run failures
/// are reported and the sweep continues; the status is nonzero if any run
/// failed.
int cmd_sweep(const RunConfig& config, std::ostream& out);

/// Metric columns available to `analyze`.
const std::vector<std::string>& analyzable_metrics();

/// Value of a named scalar metric on one line.
double metric_value(const TraceLine& line, const std::string& metric);

struct AnalyzeOptions {
  std::vector<std::filesystem::path> traces;
  std::filesystem::path output_dir;
  std::vector<std::string> metrics;      ///< empty: all
  std::size_t smoothing = 0;             ///< trailing moving-average width; 0 or 1: none
  std::filesystem::path sweep_summary;   ///< optional; supplies Delta m per run id
  bool verify = false;                   ///< recompute every metric from the logged inputs
};

/// Trailing moving average over the last `width` entries, skipping NaN.
/// NaN where the whole window is NaN.
std::vector<double> smooth(const std::vector<double>& values, std::size_t width);

/// Recomputes each line's MetricRecord from its logged gradients, losses
/// and weights and returns the number of lines that differ bitwise.
std::size_t verify_trace(const std::vector<TraceLine>& lines);

/// `analyze`: writes trajectory.csv, run_means.csv and, with a sweep
/// summary, correlations.csv into the output directory.
int cmd_analyze(const AnalyzeOptions& options, std::ostream& out);

struct EvalOptions {
  std::vector<std::filesystem::path> score_files;  ///< CSV: method,task,value,baseline,higher_is_better
  std::filesystem::path output;                    ///< optional CSV copy of the table
};

struct EvalRow {
  std::string method;
  double delta_m = 0.0;
  double delta_m_deg = 0.0;
  double mean_rank = 0.0;  ///< NaN with a single method
};

std::vector<EvalRow> evaluate_scores(const std::vector<std::filesystem::path>& score_files);

/// `eval`: Delta m, Delta m_deg and mean rank per method.
int cmd_eval(const EvalOptions& options, std::ostream& out);

}  // namespace autoscale::cli
