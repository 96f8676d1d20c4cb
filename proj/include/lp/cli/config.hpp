#pragma once

// Experiment configuration: flat `key = value` text. Keys are dotted
// (`train.eta_w = 0.05`) or grouped under `[section]` headers. `#` starts a
// comment. Unknown or repeated keys are errors.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lp/constraint_fn.hpp"
#include "lp/data.hpp"
#include "lp/lagrangian.hpp"
#include "lp/network.hpp"
#include "lp/optimizer.hpp"

namespace lp::cli {

enum class DataSource { Xor, TwoMoons, Parity, Csv };

struct DatasetConfig {
  DataSource source = DataSource::Xor;
  std::string path;
  CsvOptions csv;
  std::size_t n = 64;
  double noise = 0.1;
  std::uint64_t seed = 0;
  std::size_t seq_len = 1;
  bool standardize = false;
};

struct GradcheckConfig {
  double h = 1e-5;
  double h_confirm = 1e-6;
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
  double kink_margin = 1e-4;
  double recovery_tol = 1e-10;
  /// Random states/multipliers are drawn uniformly from [-scale, scale].
  double state_scale = 0.5;
  std::size_t max_examples = 8;
  /// Test hook: perturb one analytic partial so the check must fail.
  bool corrupt = false;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  Arch arch = Arch::Mlp;
  std::vector<std::size_t> hidden{8};
  ActivationKind activation = ActivationKind::Tanh;
  LossKind loss = LossKind::SquaredError;
  bool bias = false;
  Supervision supervision = Supervision::FinalStep;
  ConstraintKind constraint;
  RegConfig reg;
  TrainConfig train;
  std::size_t workers = 1;
  std::string out_dir = ".";
  std::string metrics_file = "metrics.jsonl";
  std::string weights_file = "weights.lpw";
  GradcheckConfig gradcheck;
};

/// Throws ConfigError whose field() is the offending key.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

Dataset make_dataset(const DatasetConfig& config);

/// Network description with input/output widths taken from the data.
NetworkSpec resolve_spec(const ExperimentConfig& config, const Dataset& data);

}  // namespace lp::cli
