// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>
#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "autoscale_cli/commands.hpp"
#include "autoscale_cli/config.hpp"
#include "autoscale_cli/log.hpp"

namespace {

using autoscale::cli::ConfigField;
using autoscale::cli::FieldKind;

struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::vector<std::string>> values;
  std::map<std::string, CLI::Option*> options;
};

std::string flag_name(std::string_view key) {
  std::string name(key);
  for (auto& c : name) {
    if (c == '_') c = '-';
  }
  return "--" + name;
}

void add_config_flags(CLI::App& app, ConfigFlags& flags) {
  app.add_option("--config", flags.config_path, "JSON config file; flags override its values")
      ->check(CLI::ExistingFile);
  for (const ConfigField& field : autoscale::cli::config_fields()) {
    const std::string key(field.key);
    auto* opt = app.add_option(flag_name(key), flags.values[key], std::string(field.help));
    if (field.kind == FieldKind::RealList) {
      opt->delimiter(',')->expected(1, CLI::detail::expected_max_vector_size);
    } else {
      opt->expected(1);
    }
    flags.options[key] = opt;
  }
}

autoscale::cli::RunConfig resolve_config(const ConfigFlags& flags) {
  auto config = flags.config_path.empty() ? autoscale::cli::RunConfig{}
                                          : autoscale::cli::load_run_config(flags.config_path);
  nlohmann::json overrides = nlohmann::json::object();
  for (const auto& [key, opt] : flags.options) {
    if (opt->count() == 0) continue;
    overrides[key] = autoscale::cli::field_value_from_text(key, flags.values.at(key));
  }
  autoscale::cli::apply_config_json(config, overrides, "command line");
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  autoscale::cli::set_log_level(autoscale::cli::log_level_from_env());

  CLI::App app{"AutoScale multi-task weight selection and metric analysis"};
  app.require_subcommand(1);

  ConfigFlags run_flags;
  auto* run = app.add_subcommand("run", "train one configured method and write its trace");
  add_config_flags(*run, run_flags);

  ConfigFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "fixed-weight scalarizations over sampled weight sets");
  add_config_flags(*sweep, sweep_flags);

  autoscale::cli::AnalyzeOptions analyze_options;
  std::string analyze_out;
  std::string analyze_summary;
  std::vector<std::string> analyze_traces;
  auto* analyze = app.add_subcommand("analyze", "export metric trajectories, run means and correlations");
  analyze->add_option("traces", analyze_traces, "trace files")->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", analyze_out, "output directory")->required();
  analyze->add_option("--metrics", analyze_options.metrics, "gms, gcs, cond, ilr_std, rl_std")
      ->delimiter(',');
  analyze->add_option("--smooth", analyze_options.smoothing, "trailing moving-average width");
  analyze->add_option("--summary", analyze_summary, "sweep summary CSV supplying delta_m per run")
      ->check(CLI::ExistingFile);
  analyze->add_flag("--verify", analyze_options.verify,
                    "recompute every logged metric and fail on any difference");

  std::vector<std::string> eval_files;
  std::string eval_out;
  auto* eval = app.add_subcommand("eval", "delta_m, delta_m_deg and mean rank from score files");
  eval->add_option("scores", eval_files, "CSV files: method,task,value,baseline,higher_is_better")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--out", eval_out, "also write the table to this CSV file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return autoscale::cli::cmd_run(resolve_config(run_flags), std::cout);
    if (sweep->parsed()) {
      auto config = resolve_config(sweep_flags);
      config.method = "sweep";
      return autoscale::cli::cmd_sweep(config, std::cout);
    }
    if (analyze->parsed()) {
      analyze_options.traces.assign(analyze_traces.begin(), analyze_traces.end());
      analyze_options.output_dir = analyze_out;
      analyze_options.sweep_summary = analyze_summary;
      return autoscale::cli::cmd_analyze(analyze_options, std::cout);
    }
    if (eval->parsed()) {
      autoscale::cli::EvalOptions options;
      options.score_files.assign(eval_files.begin(), eval_files.end());
      options.output = eval_out;
      return autoscale::cli::cmd_eval(options, std::cout);
    }
  } catch (const std::exception& e) {
    autoscale::cli::log(autoscale::cli::LogLevel::Error, e.what());
    return 2;
  }
  return 0;
}
