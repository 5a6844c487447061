#pragma once

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace asrforge {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

// Verbosity comes from ASRFORGE_LOG (error|warn|info|debug); default info.
inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("ASRFORGE_LOG");
    if (!env) return LogLevel::info;
    const std::string_view v(env);
    if (v == "error") return LogLevel::error;
    if (v == "warn") return LogLevel::warn;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::info;
  }();
  return level;
}

inline void log(LogLevel level, const std::string& message) {
  if (level > log_level()) return;
  static constexpr std::string_view names[] = {"error", "warn", "info", "debug"};
  std::cerr << "[" << names[static_cast<int>(level)] << "] " << message << "\n";
}

}  // namespace asrforge
