#include "lp/network.hpp"

#include "lp/error.hpp"

namespace lp {

Arch parse_arch(std::string_view name) {
  if (name == "mlp") return Arch::Mlp;
  if (name == "rnn") return Arch::Rnn;
  if (name == "resnet") return Arch::ResNetDirect;
  if (name == "resnet_tilde") return Arch::ResNetTilde;
  throw ConfigError("network.arch", "unknown architecture '" + std::string(name) + "'");
}

std::string to_string(Arch arch) {
  switch (arch) {
    case Arch::Mlp: return "mlp";
    case Arch::Rnn: return "rnn";
    case Arch::ResNetDirect: return "resnet";
    case Arch::ResNetTilde: return "resnet_tilde";
  }
  return "unknown";
}

Supervision parse_supervision(std::string_view name) {
  if (name == "final") return Supervision::FinalStep;
  if (name == "every_step") return Supervision::EveryStep;
  throw ConfigError("network.supervision", "unknown supervision '" + std::string(name) + "'");
}

std::string to_string(Supervision supervision) {
  return supervision == Supervision::FinalStep ? "final" : "every_step";
}

void NetworkSpec::validate() const {
  if (widths.size() < 2) throw ConfigError("network.hidden", "need at least one hidden layer (H >= 1)");
  for (std::size_t k = 0; k < widths.size(); ++k) {
    if (widths[k] == 0) throw ConfigError("network.hidden", "layer " + std::to_string(k) + " has zero width");
  }
  if (output_width == 0) throw ConfigError("network.output_width", "must be positive");
  if (arch == Arch::Rnn) {
    if (seq_len < 1) throw ConfigError("network.seq_len", "recurrent networks need T >= 1");
  } else if (seq_len != 1) {
    throw ConfigError("network.seq_len", "only recurrent networks are unrolled over time");
  }
  if (arch == Arch::ResNetDirect || arch == Arch::ResNetTilde) {
    // identity skips chain x_0 -> x_1 -> ... -> x_H
    for (std::size_t k = 1; k < widths.size(); ++k) {
      if (widths[k] != widths[0]) {
        throw ConfigError("network.hidden", "residual networks need equal widths d_0 = d_1 = ... = d_H");
      }
    }
  }
}

}  // namespace lp
