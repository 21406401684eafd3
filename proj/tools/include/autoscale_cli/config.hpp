// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autoscale/problem.hpp"
#include "autoscale/scheduler.hpp"

namespace autoscale::cli {

/// Declarative description of one `run` or `sweep`. JSON keys and long
/// command-line flags share names (flags use '-' where keys use '_').
struct RunConfig {
  // Method: autoscale, unitary, fixed, rlw, stl or sweep.
  std::string method = "autoscale";

  // Problem family: reference, quadratic or mlp. The reference family is
  // the fixed imbalanced three-task quadratic and ignores the size fields.
  std::string problem = "reference";
  std::uint64_t tasks = 3;
  std::uint64_t dim = 16;
  std::vector<double> scales{1.0, 4.0, 16.0};
  double angle = 1.5707963267948966;
  double radius = 1.0;
  std::vector<double> offsets;  // empty: b_k = s_k
  double step_size = 0.0;       // 0: family default
  double gradient_noise = 0.0;
  std::uint64_t input_dim = 4;
  std::uint64_t width = 16;
  std::uint64_t samples = 64;
  double noise = 0.0;

  std::uint64_t iters = 5000;
  std::uint64_t seed = 2024;

  double alpha = 0.2;
  std::uint64_t tau = 50;
  std::uint64_t eta = 10;
  std::string cost = "low-cond";
  std::uint64_t snapshot_stride = 1;
  double weight_floor = 1e-4;
  std::uint64_t solver_evaluations = 20000;
  std::uint64_t solver_restarts = 4;

  std::vector<double> weights;  // method fixed; rescaled onto the feasible set

  std::uint64_t count = 19;
  std::string scheme = "dirichlet-uniform";
  double log10_span = 1.5;
  std::uint64_t jobs = 1;

  std::uint64_t stl_iters = 0;  // 0: iters; only used without closed-form optima

  std::string run_id;   // empty: the method name
  std::string trace;    // trace path; empty: no trace
  std::string summary;  // summary path; empty: no summary
};

enum class FieldKind { String, Unsigned, Real, RealList };

struct ConfigField {
  std::string_view key;
  FieldKind kind;
  std::string_view help;
  bool hashed;  ///< part of the config hash (output locations and parallelism are not)
};

std::span<const ConfigField> config_fields();

/// Applies the keys of a JSON object. Throws ParseError naming `origin` for
/// unknown keys and ill-typed values.
void apply_config_json(RunConfig& config, const nlohmann::json& object, std::string_view origin);

/// Converts command-line text for `key` to a JSON value of the field's kind.
nlohmann::json field_value_from_text(std::string_view key, const std::vector<std::string>& text);

RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& config);

/// Throws InvalidArgument for unknown method, family, cost or scheme names
/// and for invalid AutoScale settings of an autoscale run.
void validate(const RunConfig& config);

/// 16 hex digits of FNV-1a over the canonical JSON of the hashed fields.
std::string config_hash(const RunConfig& config);

std::unique_ptr<MultiTaskProblem> build_problem(const RunConfig& config);

AutoScaleConfig autoscale_config(const RunConfig& config);

}  // namespace autoscale::cli
