// SPDX-License-Identifier: Apache-2.0
#include "autoscale_cli/trace.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <json.hpp>
#include <set>

#include "autoscale/error.hpp"

namespace autoscale::cli {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 22> kFieldOrder{
    "version",  "run_id",   "method",     "cost_kind",  "scheme",      "seed",
    "config_hash", "iter",  "window",     "weights",    "losses",      "grad_norms",
    "gram_upper",  "gms_mean", "gcs_mean", "cond_number", "ilr",       "ilr_std",
    "ldr",      "rl",       "rl_std",     "degenerate_flags"};

std::string location(std::size_t line_number) {
  return line_number == 0 ? "trace line" : "trace line " + std::to_string(line_number);
}

[[noreturn]] void fail(std::size_t line_number, const std::string& message) {
  throw ParseError(location(line_number) + ": " + message);
}

void append_key(std::string& out, std::string_view key) {
  if (out.size() > 1) out += ',';
  out += '"';
  out += key;
  out += "\":";
}

void append_string(std::string& out, std::string_view key, const std::string& value) {
  append_key(out, key);
  out += json(value).dump();
}

void append_uint(std::string& out, std::string_view key, std::uint64_t value) {
  append_key(out, key);
  out += std::to_string(value);
}

void append_double(std::string& out, std::string_view key, double value) {
  append_key(out, key);
  out += format_double(value);
}

void append_array(std::string& out, std::string_view key, const std::vector<double>& values) {
  append_key(out, key);
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(values[i]);
  }
  out += ']';
}

double to_double(const json& v, std::string_view key, std::size_t line_number) {
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  fail(line_number, "field '" + std::string(key) + "' is not a number");
}

std::vector<double> to_array(const json& v, std::string_view key, std::size_t line_number) {
  if (!v.is_array()) fail(line_number, "field '" + std::string(key) + "' is not an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(to_double(x, key, line_number));
  return out;
}

std::uint64_t to_uint(const json& v, std::string_view key, std::size_t line_number) {
  if (!v.is_number_unsigned()) {
    fail(line_number, "field '" + std::string(key) + "' is not a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::string to_string_field(const json& v, std::string_view key, std::size_t line_number) {
  if (!v.is_string()) fail(line_number, "field '" + std::string(key) + "' is not a string");
  return v.get<std::string>();
}

bool same_bits(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_bits(a[i], b[i])) return false;
  }
  return true;
}

// Names the first field (in serialization order) whose key does not occur
// in a line that failed to parse as a whole.
std::string first_absent_field(std::string_view text) {
  for (auto key : kFieldOrder) {
    const std::string quoted = "\"" + std::string(key) + "\":";
    if (text.find(quoted) == std::string_view::npos) return std::string(key);
  }
  return {};
}

}  // namespace

TraceLine make_trace_line(const TraceMeta& meta, const IterationRecord& record,
                          std::uint64_t window) {
  TraceLine line;
  line.meta = meta;
  line.window = window;
  line.metrics = record.metrics;
  line.losses = record.losses;
  const auto norms = record.grad.norms();
  line.grad_norms.assign(norms.begin(), norms.end());
  const auto& gram = record.grad.gram();
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    for (Eigen::Index j = i; j < gram.cols(); ++j) line.gram_upper.push_back(gram(i, j));
  }
  return line;
}

GradientSnapshot snapshot_of(const TraceLine& line) {
  const auto k = static_cast<Eigen::Index>(line.grad_norms.size());
  if (line.gram_upper.size() != static_cast<std::size_t>(k * (k + 1) / 2)) {
    throw InvalidArgument("Gram triangle length does not match the task count");
  }
  Eigen::MatrixXd gram(k, k);
  std::size_t p = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i; j < k; ++j) {
      gram(i, j) = line.gram_upper[p];
      gram(j, i) = line.gram_upper[p];
      ++p;
    }
  }
  return GradientSnapshot::from_parts(line.grad_norms, std::move(gram), line.metrics.iter);
}

bool bitwise_equal(const TraceLine& a, const TraceLine& b) {
  const auto& m = a.metrics;
  const auto& n = b.metrics;
  return a.meta == b.meta && a.window == b.window && m.iter == n.iter &&
         same_bits(m.gms_mean, n.gms_mean) && same_bits(m.gcs_mean, n.gcs_mean) &&
         same_bits(m.cond_number, n.cond_number) && same_bits(m.ilr_per_task, n.ilr_per_task) &&
         same_bits(m.ilr_std, n.ilr_std) && same_bits(m.ldr_per_task, n.ldr_per_task) &&
         same_bits(m.rl_per_task, n.rl_per_task) && same_bits(m.rl_std, n.rl_std) &&
         same_bits(m.weights, n.weights) && m.degenerate_flags == n.degenerate_flags &&
         same_bits(a.losses, b.losses) && same_bits(a.grad_norms, b.grad_norms) &&
         same_bits(a.gram_upper, b.gram_upper);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "null";
  if (std::isinf(value)) return value > 0 ? "\"inf\"" : "\"-inf\"";
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  std::string text(buf.data(), end);
  // Keep integral values typed as floating point so that -0 survives.
  if (text.find_first_of(".e") == std::string::npos) text += ".0";
  return text;
}

std::string serialize_trace_line(const TraceLine& line) {
  const auto& m = line.metrics;
  std::string out = "{";
  append_uint(out, "version", kTraceVersion);
  append_string(out, "run_id", line.meta.run_id);
  append_string(out, "method", line.meta.method);
  append_string(out, "cost_kind", line.meta.cost_kind);
  append_string(out, "scheme", line.meta.scheme);
  append_uint(out, "seed", line.meta.seed);
  append_string(out, "config_hash", line.meta.config_hash);
  append_uint(out, "iter", m.iter);
  append_uint(out, "window", line.window);
  append_array(out, "weights", m.weights);
  append_array(out, "losses", line.losses);
  append_array(out, "grad_norms", line.grad_norms);
  append_array(out, "gram_upper", line.gram_upper);
  append_double(out, "gms_mean", m.gms_mean);
  append_double(out, "gcs_mean", m.gcs_mean);
  append_double(out, "cond_number", m.cond_number);
  append_array(out, "ilr", m.ilr_per_task);
  append_double(out, "ilr_std", m.ilr_std);
  append_array(out, "ldr", m.ldr_per_task);
  append_array(out, "rl", m.rl_per_task);
  append_double(out, "rl_std", m.rl_std);
  append_uint(out, "degenerate_flags", m.degenerate_flags);
  out += '}';
  return out;
}

TraceLine parse_trace_line(std::string_view text, std::size_t line_number) {
  json obj;
  try {
    obj = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto missing = first_absent_field(text);
    if (!missing.empty()) {
      fail(line_number, "malformed record, missing field '" + missing + "' (" + e.what() + ")");
    }
    fail(line_number, std::string("malformed record (") + e.what() + ")");
  }
  if (!obj.is_object()) fail(line_number, "record is not a JSON object");

  const std::set<std::string_view> known(kFieldOrder.begin(), kFieldOrder.end());
  for (const auto& item : obj.items()) {
    if (!known.contains(item.key())) fail(line_number, "unknown field '" + item.key() + "'");
  }
  for (auto key : kFieldOrder) {
    if (!obj.contains(key)) fail(line_number, "missing field '" + std::string(key) + "'");
  }

  const auto version = to_uint(obj["version"], "version", line_number);
  if (version != kTraceVersion) {
    fail(line_number, "trace version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kTraceVersion) + ")");
  }

  TraceLine line;
  line.meta.run_id = to_string_field(obj["run_id"], "run_id", line_number);
  line.meta.method = to_string_field(obj["method"], "method", line_number);
  line.meta.cost_kind = to_string_field(obj["cost_kind"], "cost_kind", line_number);
  line.meta.scheme = to_string_field(obj["scheme"], "scheme", line_number);
  line.meta.seed = to_uint(obj["seed"], "seed", line_number);
  line.meta.config_hash = to_string_field(obj["config_hash"], "config_hash", line_number);
  line.window = to_uint(obj["window"], "window", line_number);

  auto& m = line.metrics;
  m.iter = to_uint(obj["iter"], "iter", line_number);
  m.weights = to_array(obj["weights"], "weights", line_number);
  line.losses = to_array(obj["losses"], "losses", line_number);
  line.grad_norms = to_array(obj["grad_norms"], "grad_norms", line_number);
  line.gram_upper = to_array(obj["gram_upper"], "gram_upper", line_number);
  m.gms_mean = to_double(obj["gms_mean"], "gms_mean", line_number);
  m.gcs_mean = to_double(obj["gcs_mean"], "gcs_mean", line_number);
  m.cond_number = to_double(obj["cond_number"], "cond_number", line_number);
  m.ilr_per_task = to_array(obj["ilr"], "ilr", line_number);
  m.ilr_std = to_double(obj["ilr_std"], "ilr_std", line_number);
  m.ldr_per_task = to_array(obj["ldr"], "ldr", line_number);
  m.rl_per_task = to_array(obj["rl"], "rl", line_number);
  m.rl_std = to_double(obj["rl_std"], "rl_std", line_number);
  const auto flags = to_uint(obj["degenerate_flags"], "degenerate_flags", line_number);
  if (flags > std::numeric_limits<std::uint32_t>::max()) {
    fail(line_number, "field 'degenerate_flags' is out of range");
  }
  m.degenerate_flags = static_cast<std::uint32_t>(flags);

  const auto k = m.weights.size();
  const auto check_len = [&](const std::vector<double>& v, std::string_view key, std::size_t n) {
    if (v.size() != n) {
      fail(line_number, "field '" + std::string(key) + "' has " + std::to_string(v.size()) +
                            " entries, expected " + std::to_string(n));
    }
  };
  check_len(line.losses, "losses", k);
  check_len(line.grad_norms, "grad_norms", k);
  check_len(line.gram_upper, "gram_upper", k * (k + 1) / 2);
  check_len(m.ilr_per_task, "ilr", k);
  check_len(m.ldr_per_task, "ldr", k);
  check_len(m.rl_per_task, "rl", k);
  return line;
}

std::vector<TraceLine> read_trace(std::istream& in, std::string_view source) {
  std::vector<TraceLine> lines;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (text.empty()) continue;
    try {
      lines.push_back(parse_trace_line(text, number));
    } catch (const ParseError& e) {
      throw ParseError(std::string(source) + ": " + e.what());
    }
  }
  return lines;
}

void TraceWriter::write(const TraceLine& line) {
  out_ << serialize_trace_line(line) << '\n';
}

}  // namespace autoscale::cli
