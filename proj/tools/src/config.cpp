// SPDX-License-Identifier: Apache-2.0
#include "autoscale_cli/config.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <variant>

#include "autoscale/baselines.hpp"
#include "autoscale/costs.hpp"
#include "autoscale/error.hpp"
#include "autoscale/mlp.hpp"
#include "autoscale/quadratic.hpp"

namespace autoscale::cli {
namespace {

using nlohmann::json;

using Member = std::variant<std::string RunConfig::*, std::uint64_t RunConfig::*, double RunConfig::*,
                            std::vector<double> RunConfig::*>;

struct FieldBinding {
  ConfigField field;
  Member member;
};

constexpr std::size_t kNumFields = 33;

const std::array<FieldBinding, kNumFields> kBindings{{
    {{"method", FieldKind::String, "autoscale, unitary, fixed, rlw, stl or sweep", true}, &RunConfig::method},
    {{"problem", FieldKind::String, "problem family: reference, quadratic or mlp", true}, &RunConfig::problem},
    {{"tasks", FieldKind::Unsigned, "number of tasks K", true}, &RunConfig::tasks},
    {{"dim", FieldKind::Unsigned, "quadratic parameter dimension D", true}, &RunConfig::dim},
    {{"scales", FieldKind::RealList, "quadratic task scales s_k", true}, &RunConfig::scales},
    {{"angle", FieldKind::Real, "quadratic pairwise conflict angle in radians", true}, &RunConfig::angle},
    {{"radius", FieldKind::Real, "distance of quadratic task centers from the start", true}, &RunConfig::radius},
    {{"offsets", FieldKind::RealList, "quadratic optimum losses b_k (default s_k)", true}, &RunConfig::offsets},
    {{"step_size", FieldKind::Real, "gradient descent step size (0: family default)", true}, &RunConfig::step_size},
    {{"gradient_noise", FieldKind::Real, "quadratic minibatch noise level", true}, &RunConfig::gradient_noise},
    {{"input_dim", FieldKind::Unsigned, "MLP input dimension", true}, &RunConfig::input_dim},
    {{"width", FieldKind::Unsigned, "MLP hidden width", true}, &RunConfig::width},
    {{"samples", FieldKind::Unsigned, "MLP training samples", true}, &RunConfig::samples},
    {{"noise", FieldKind::Real, "MLP target noise sigma", true}, &RunConfig::noise},
    {{"iters", FieldKind::Unsigned, "training iterations T", true}, &RunConfig::iters},
    {{"seed", FieldKind::Unsigned, "root random seed", true}, &RunConfig::seed},
    {{"alpha", FieldKind::Real, "AutoScale exploration ratio", true}, &RunConfig::alpha},
    {{"tau", FieldKind::Unsigned, "AutoScale window size", true}, &RunConfig::tau},
    {{"eta", FieldKind::Unsigned, "AutoScale aggregation size", true}, &RunConfig::eta},
    {{"cost", FieldKind::String, "AutoScale cost: equal-grad, equal-loss or low-cond", true}, &RunConfig::cost},
    {{"snapshot_stride", FieldKind::Unsigned, "buffer every n-th iteration of a window", true}, &RunConfig::snapshot_stride},
    {{"weight_floor", FieldKind::Real, "lower bound of every task weight", true}, &RunConfig::weight_floor},
    {{"solver_evaluations", FieldKind::Unsigned, "cost evaluation budget of the simplex search", true}, &RunConfig::solver_evaluations},
    {{"solver_restarts", FieldKind::Unsigned, "restarts of the simplex search", true}, &RunConfig::solver_restarts},
    {{"weights", FieldKind::RealList, "task weights for method fixed", true}, &RunConfig::weights},
    {{"count", FieldKind::Unsigned, "number of sweep weight sets N", true}, &RunConfig::count},
    {{"scheme", FieldKind::String, "sweep sampling: dirichlet-uniform or log-uniform-grid", true}, &RunConfig::scheme},
    {{"log10_span", FieldKind::Real, "half-width of the log10 weight range of the grid scheme", true}, &RunConfig::log10_span},
    {{"jobs", FieldKind::Unsigned, "concurrent sweep runs", false}, &RunConfig::jobs},
    {{"stl_iters", FieldKind::Unsigned, "single-task baseline iterations (0: iters)", true}, &RunConfig::stl_iters},
    {{"run_id", FieldKind::String, "run identifier written to the trace", false}, &RunConfig::run_id},
    {{"trace", FieldKind::String, "trace output path", false}, &RunConfig::trace},
    {{"summary", FieldKind::String, "summary output path", false}, &RunConfig::summary},
}};

const std::array<ConfigField, kNumFields>& field_table() {
  static const auto table = [] {
    std::array<ConfigField, kNumFields> t{};
    for (std::size_t i = 0; i < kNumFields; ++i) t[i] = kBindings[i].field;
    return t;
  }();
  return table;
}

const FieldBinding* find_binding(std::string_view key) {
  for (std::size_t i = 0; i < kNumFields; ++i) {
    if (kBindings[i].field.key == key) return &kBindings[i];
  }
  return nullptr;
}

[[noreturn]] void bad_value(std::string_view origin, std::string_view key, std::string_view expected) {
  throw ParseError(std::string(origin) + ": key '" + std::string(key) + "' must be " +
                   std::string(expected));
}

}  // namespace

std::span<const ConfigField> config_fields() { return field_table(); }

void apply_config_json(RunConfig& config, const json& object, std::string_view origin) {
  if (!object.is_object()) throw ParseError(std::string(origin) + ": config must be a JSON object");
  for (const auto& item : object.items()) {
    const auto* binding = find_binding(item.key());
    if (binding == nullptr) {
      throw ParseError(std::string(origin) + ": unknown config key '" + item.key() + "'");
    }
    const auto& v = item.value();
    const auto key = binding->field.key;
    std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(config.*member)>;
          if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) bad_value(origin, key, "a string");
            config.*member = v.get<std::string>();
          } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
              bad_value(origin, key, "a nonnegative integer");
            }
            config.*member = v.get<std::uint64_t>();
          } else if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) bad_value(origin, key, "a number");
            config.*member = v.get<double>();
          } else {
            if (!v.is_array()) bad_value(origin, key, "an array of numbers");
            std::vector<double> values;
            for (const auto& x : v) {
              if (!x.is_number()) bad_value(origin, key, "an array of numbers");
              values.push_back(x.get<double>());
            }
            config.*member = std::move(values);
          }
        },
        binding->member);
  }
}

json field_value_from_text(std::string_view key, const std::vector<std::string>& text) {
  const auto* binding = find_binding(key);
  if (binding == nullptr) throw InvalidArgument("unknown config key '" + std::string(key) + "'");
  const auto origin = "--" + std::string(key);
  const auto parse_real = [&](const std::string& s) {
    double value = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || end != s.data() + s.size()) bad_value(origin, key, "a number");
    return value;
  };
  switch (binding->field.kind) {
    case FieldKind::String:
      return text.empty() ? std::string() : text.back();
    case FieldKind::Unsigned: {
      const auto& s = text.back();
      std::uint64_t value = 0;
      const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
      if (ec != std::errc() || end != s.data() + s.size()) {
        bad_value(origin, key, "a nonnegative integer");
      }
      return value;
    }
    case FieldKind::Real:
      return parse_real(text.back());
    case FieldKind::RealList: {
      json list = json::array();
      for (const auto& s : text) list.push_back(parse_real(s));
      return list;
    }
  }
  return {};
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  json object;
  try {
    object = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  RunConfig config;
  apply_config_json(config, object, path.string());
  return config;
}

json to_json(const RunConfig& config) {
  json out = json::object();
  for (std::size_t i = 0; i < kNumFields; ++i) {
    std::visit([&](auto member) { out[std::string(kBindings[i].field.key)] = config.*member; },
               kBindings[i].member);
  }
  return out;
}

void validate(const RunConfig& config) {
  static const std::set<std::string_view> methods{"autoscale", "unitary", "fixed",
                                                  "rlw",       "stl",     "sweep"};
  static const std::set<std::string_view> families{"reference", "quadratic", "mlp"};
  if (!methods.contains(config.method)) {
    throw InvalidArgument("unknown method '" + config.method +
                          "' (expected autoscale, unitary, fixed, rlw, stl or sweep)");
  }
  if (!families.contains(config.problem)) {
    throw InvalidArgument("unknown problem family '" + config.problem +
                          "' (expected reference, quadratic or mlp)");
  }
  if (config.iters == 0) throw InvalidArgument("iters must be positive");
  parse_cost_kind(config.cost);
  parse_sampling_scheme(config.scheme);
  if (config.method == "autoscale") autoscale_config(config).validate();
  if (config.method == "fixed" && config.weights.empty()) {
    throw InvalidArgument("method fixed needs weights");
  }
  const std::uint64_t num_tasks = config.problem == "reference" ? 3 : config.tasks;
  if (!config.weights.empty() && config.weights.size() != num_tasks) {
    throw InvalidArgument("weights has " + std::to_string(config.weights.size()) +
                          " entries but the problem has " + std::to_string(num_tasks) + " tasks");
  }
  if (config.method == "sweep" && config.count < 2) {
    throw InvalidArgument("a sweep needs count >= 2");
  }
}

std::string config_hash(const RunConfig& config) {
  json hashed = json::object();
  const auto full = to_json(config);
  for (const auto& field : config_fields()) {
    if (field.hashed) hashed[std::string(field.key)] = full[std::string(field.key)];
  }
  const auto text = hashed.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::unique_ptr<MultiTaskProblem> build_problem(const RunConfig& config) {
  if (config.problem == "reference") return make_reference_problem(config.seed);
  if (config.problem == "quadratic") {
    QuadraticOptions options;
    options.radius = config.radius;
    options.offsets = config.offsets;
    options.step_size = config.step_size;
    options.gradient_noise = config.gradient_noise;
    if (config.scales.size() != config.tasks) {
      throw InvalidArgument("scales has " + std::to_string(config.scales.size()) +
                            " entries for " + std::to_string(config.tasks) + " tasks");
    }
    return make_quadratic_problem(config.tasks, config.dim, config.scales, config.angle, config.seed,
                                  options);
  }
  if (config.problem == "mlp") {
    MlpOptions options;
    if (config.step_size > 0.0) options.step_size = config.step_size;
    return make_mlp_problem(config.tasks, config.input_dim, config.width, config.samples,
                            config.noise, config.seed, options);
  }
  throw InvalidArgument("unknown problem family '" + config.problem + "'");
}

AutoScaleConfig autoscale_config(const RunConfig& config) {
  AutoScaleConfig out;
  out.total_iters = config.iters;
  out.exploration_ratio = config.alpha;
  out.window_size = config.tau;
  out.aggregation_size = config.eta;
  out.cost_kind = parse_cost_kind(config.cost);
  out.seed = config.seed;
  out.snapshot_stride = config.snapshot_stride;
  out.weight_floor = config.weight_floor;
  out.solver_evaluations = config.solver_evaluations;
  out.solver_restarts = config.solver_restarts;
  return out;
}

}  // namespace autoscale::cli
