#include "lp/cli/log.hpp"

#include <cstdlib>
#include <ostream>

namespace lp::cli {

LogLevel parse_log_level(std::string_view name) {
  if (name == "error") return LogLevel::Error;
  if (name == "debug") return LogLevel::Debug;
  return LogLevel::Info;
}

LogLevel log_level_from_env() {
  const char* v = std::getenv("LP_LOG_LEVEL");
  return v == nullptr ? LogLevel::Info : parse_log_level(v);
}

void Logger::emit(LogLevel level, const char* tag, const std::string& msg) const {
  if (!enabled(level)) return;
  sink_ << "[" << tag << "] " << msg << '\n';
}

}  // namespace lp::cli
