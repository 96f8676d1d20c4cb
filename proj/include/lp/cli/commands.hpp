#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "lp/cli/log.hpp"
#include "lp/optimizer.hpp"

namespace lp::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kDiverged = 2, kCheckFailed = 3 };

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

struct InferRequest {
  std::string weights_path;
  std::string data_path;
  bool header = false;
  /// Predictions CSV; empty writes to `out`.
  std::string output_path;
};

/// Serializes one metrics record as a single JSON line (no trailing newline).
std::string metrics_json(const IterMetrics& m);

int cmd_train(const std::string& config_path, const Overrides& overrides, std::ostream& out, const Logger& log);
int cmd_gradcheck(const std::string& config_path, const Overrides& overrides, std::ostream& out, const Logger& log);
int cmd_infer(const InferRequest& request, std::ostream& out, const Logger& log);

}  // namespace lp::cli
