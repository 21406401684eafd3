// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "autoscale/metrics.hpp"
#include "autoscale/scheduler.hpp"
#include "autoscale/snapshot.hpp"

namespace autoscale::cli {

inline constexpr std::uint64_t kTraceVersion = 1;

/// Run metadata repeated on every trace line so each line stands alone.
struct TraceMeta {
  std::string run_id;
  std::string method;
  std::string cost_kind;  ///< "none" for methods without a cost
  std::string scheme;     ///< weight sampling scheme, "none" outside sweeps
  std::uint64_t seed = 0;
  std::string config_hash;
  bool operator==(const TraceMeta&) const = default;
};

/// One iteration of a training run.
struct TraceLine {
  TraceMeta meta;
  /// 1-based exploration window of an AutoScale run; 0 for phase 2 and for
  /// methods without windows.
  std::uint64_t window = 0;
  MetricRecord metrics;
  std::vector<double> losses;
  std::vector<double> grad_norms;
  std::vector<double> gram_upper;  ///< row-major upper triangle, K(K+1)/2 entries
};

TraceLine make_trace_line(const TraceMeta& meta, const IterationRecord& record,
                          std::uint64_t window = 0);

/// Gradient snapshot rebuilt from the logged norms and Gram triangle.
GradientSnapshot snapshot_of(const TraceLine& line);

/// Equality of every field, comparing doubles by bit pattern. Any NaN
/// equals any NaN: the format stores NaN as null and drops the payload.
bool bitwise_equal(const TraceLine& a, const TraceLine& b);

/// Shortest decimal text that parses back to the same double. Non-finite
/// values map to null, "inf" and "-inf".
std::string format_double(double value);

/// One JSON object without a trailing newline. Keys appear in a fixed order.
std::string serialize_trace_line(const TraceLine& line);

/// Strict inverse of serialize_trace_line. Throws ParseError on malformed
/// input, unknown or missing fields, wrong types, inconsistent lengths or a
/// version mismatch. `line_number` (1-based, 0 = unknown) is included in
/// the message.
TraceLine parse_trace_line(std::string_view text, std::size_t line_number = 0);

/// Reads every non-empty line; errors are prefixed with `source`.
std::vector<TraceLine> read_trace(std::istream& in, std::string_view source);

class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out) : out_(out) {}
  void write(const TraceLine& line);

 private:
  std::ostream& out_;
};

}  // namespace autoscale::cli
