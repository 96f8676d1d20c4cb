#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lp/linalg.hpp"

namespace lp {

/// Supervised pairs (x_i, y_i). Static inputs are sequences of length 1.
struct Dataset {
  std::vector<std::vector<Vector>> inputs;
  std::vector<Vector> targets;
  /// Optional per-step targets (N x T) for every-step recurrent supervision.
  std::vector<std::vector<Vector>> step_targets;
  std::vector<std::string> input_names;
  std::vector<std::string> target_names;

  std::size_t size() const noexcept { return inputs.size(); }
  std::size_t seq_len() const noexcept { return inputs.empty() ? 0 : inputs.front().size(); }
  std::size_t input_width() const noexcept;
  std::size_t target_width() const noexcept { return targets.empty() ? 0 : targets.front().size(); }

  /// Throws DataError on ragged widths or count mismatches.
  void validate() const;

  bool operator==(const Dataset&) const = default;
};

struct CsvOptions {
  std::vector<std::size_t> input_cols;
  std::vector<std::size_t> target_cols;
  /// When set, the single target column holds a class label encoded one-hot.
  std::optional<std::size_t> one_hot;
  bool header = false;
  /// Input columns are split into this many equal-width time steps.
  std::size_t seq_len = 1;
};

/// Comma-delimited, '.' decimal. Errors name the offending line.
Dataset load_csv(const std::string& path, const CsvOptions& options);

/// The four XOR points over {0,1}^2 with targets 0, 1, 1, 0.
Dataset gen_xor();

/// Two interleaved half circles, labels 0 (upper) and 1 (lower), plus isotropic Gaussian noise.
Dataset gen_two_moons(std::size_t n, double noise, std::uint64_t seed);

/// Random bit sequences of length T, one bit per step; target is the parity of all bits.
/// Per-step targets hold the running parity.
Dataset gen_parity_sequences(std::size_t n, std::size_t seq_len, std::uint64_t seed);

/// Z-scores every input component in place (zero-variance components are only centred).
void standardize(Dataset& data);

}  // namespace lp
