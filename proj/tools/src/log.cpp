// SPDX-License-Identifier: Apache-2.0
#include "autoscale_cli/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace autoscale::cli {
namespace {

std::atomic<LogLevel> g_level{LogLevel::Info};
std::mutex g_mutex;

}  // namespace

LogLevel log_level_from_env() {
  const char* value = std::getenv("AUTOSCALE_LOG");
  if (value == nullptr) return LogLevel::Info;
  const std::string_view v(value);
  if (v == "quiet") return LogLevel::Quiet;
  if (v == "error") return LogLevel::Error;
  if (v == "debug") return LogLevel::Debug;
  return LogLevel::Info;
}

void set_log_level(LogLevel level) { g_level = level; }

void log(LogLevel level, std::string_view message) {
  if (level == LogLevel::Quiet || level > g_level.load()) return;
  const std::lock_guard lock(g_mutex);
  std::cerr << (level == LogLevel::Error ? "error: " : level == LogLevel::Debug ? "debug: " : "")
            << message << '\n';
}

}  // namespace autoscale::cli
