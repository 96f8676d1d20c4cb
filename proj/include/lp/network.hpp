#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lp/functions.hpp"

namespace lp {

enum class Arch { Mlp, Rnn, ResNetDirect, ResNetTilde };

/// Where the loss attaches in an unrolled recurrent network.
enum class Supervision { FinalStep, EveryStep };

Arch parse_arch(std::string_view name);
std::string to_string(Arch arch);
Supervision parse_supervision(std::string_view name);
std::string to_string(Supervision supervision);

struct NetworkSpec {
  Arch arch = Arch::Mlp;
  /// d_0 (input) through d_H (top hidden layer).
  std::vector<std::size_t> widths;
  std::size_t output_width = 1;
  ActivationKind activation = ActivationKind::Tanh;
  LossKind loss = LossKind::SquaredError;
  /// Unrolled length T; must be 1 for non-recurrent architectures.
  std::size_t seq_len = 1;
  /// Append a constant 1 to every weight input so W carries a bias column.
  bool bias = false;
  Supervision supervision = Supervision::FinalStep;

  std::size_t hidden_layers() const noexcept { return widths.empty() ? 0 : widths.size() - 1; }
  std::size_t input_width() const noexcept { return widths.empty() ? 0 : widths.front(); }

  /// Throws ConfigError naming the violated field.
  void validate() const;

  bool operator==(const NetworkSpec&) const = default;
};

}  // namespace lp
