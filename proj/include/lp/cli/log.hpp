#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

namespace lp::cli {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

/// LP_LOG_LEVEL, defaulting to info. Unknown values fall back to info.
LogLevel log_level_from_env();
LogLevel parse_log_level(std::string_view name);

class Logger {
 public:
  Logger(std::ostream& sink, LogLevel level) : sink_(sink), level_(level) {}

  void error(const std::string& msg) const { emit(LogLevel::Error, "error", msg); }
  void info(const std::string& msg) const { emit(LogLevel::Info, "info", msg); }
  void debug(const std::string& msg) const { emit(LogLevel::Debug, "debug", msg); }
  bool enabled(LogLevel level) const noexcept { return level <= level_; }

 private:
  void emit(LogLevel level, const char* tag, const std::string& msg) const;

  std::ostream& sink_;
  LogLevel level_;
};

}  // namespace lp::cli
