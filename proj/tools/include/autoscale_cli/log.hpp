// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

namespace autoscale::cli {

enum class LogLevel { Quiet = 0, Error = 1, Info = 2, Debug = 3 };

/// Reads AUTOSCALE_LOG (quiet, error, info, debug; default info). Affects
/// only what is written to stderr.
LogLevel log_level_from_env();

void set_log_level(LogLevel level);

void log(LogLevel level, std::string_view message);

}  // namespace autoscale::cli
