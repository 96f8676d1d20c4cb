#pragma once

// Architecture-agnostic constraint graph.
//
// Every state variable x (one per hidden layer, and per time step in
// unrolled recurrent nets) is defined by exactly one constraint node
//
//     G(x_out - base) = 0,
//
// where base is sigma(W in), sigma(W in + U prev), in + sigma(W in) or
// sigma(W * sum of inputs) depending on the node form. Network inputs are
// constants of each example, never variables. Node ids coincide with the
// slot of the variable they define.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lp/network.hpp"

namespace lp {

enum class NodeForm { Feedforward, Recurrent, ResidualDirect, ResidualTilde };

struct Operand {
  enum class Source { State, Input };
  Source source = Source::State;
  /// Variable slot for State, input time step (0-based) for Input.
  std::size_t index = 0;

  static Operand state(std::size_t slot) { return {Source::State, slot}; }
  static Operand input(std::size_t step) { return {Source::Input, step}; }
  bool operator==(const Operand&) const = default;
};

struct ConstraintNode {
  std::size_t id = 0;
  NodeForm form = NodeForm::Feedforward;
  int layer = 0;  // layer of the constrained variable, 1..H
  int time = 0;   // 1..T for recurrent nodes, 0 otherwise
  std::size_t output = 0;
  /// Summed to form the layer input (several operands only for ResidualTilde).
  std::vector<Operand> inputs;
  /// Recurrent state at t-1; absent at t = 1 where it is the zero vector.
  std::optional<std::size_t> previous;
  std::size_t weight = 0;
  std::optional<std::size_t> recurrent_weight;
};

/// One supervised output: V(W_H * sum(top), y).
struct LossTap {
  std::vector<Operand> top;
  /// Per-step target index; absent means the example's final target.
  std::optional<std::size_t> step;
  int time = 0;
};

struct VariableInfo {
  int layer = 0;
  int time = 0;
  std::size_t width = 0;
  std::size_t defining_node = 0;
  /// Nodes reading this variable as an input or previous state, ascending.
  std::vector<std::size_t> consumers;
  std::vector<std::size_t> loss_taps;
};

class ConstraintGraph {
 public:
  /// Validates structural invariants and derives consumer lists.
  ConstraintGraph(NetworkSpec spec, std::vector<ConstraintNode> nodes, std::vector<LossTap> taps);

  const NetworkSpec& spec() const noexcept { return spec_; }
  std::span<const ConstraintNode> nodes() const noexcept { return nodes_; }
  std::span<const VariableInfo> variables() const noexcept { return variables_; }
  std::span<const LossTap> loss_taps() const noexcept { return taps_; }

  const ConstraintNode& node(std::size_t id) const { return nodes_.at(id); }
  const VariableInfo& variable(std::size_t slot) const { return variables_.at(slot); }

  std::size_t hidden_layers() const noexcept { return spec_.hidden_layers(); }
  /// Index of the output weight W_H.
  std::size_t output_weight() const noexcept { return spec_.hidden_layers(); }

  /// Nodes whose pre-activation uses W_k (resp. U_k), ascending.
  std::span<const std::size_t> nodes_using_weight(std::size_t k) const { return weight_users_.at(k); }
  std::span<const std::size_t> nodes_using_recurrent(std::size_t k) const { return recurrent_users_.at(k); }

  /// Layer/time of an operand for tracing: inputs live at layer 0.
  int operand_layer(const Operand& op) const;
  int operand_time(const Operand& op) const;
  std::size_t operand_width(const Operand& op) const;

  /// Human-readable variable name, e.g. "x[layer=2,t=3]".
  std::string variable_name(std::size_t slot) const;

 private:
  NetworkSpec spec_;
  std::vector<ConstraintNode> nodes_;
  std::vector<LossTap> taps_;
  std::vector<VariableInfo> variables_;
  std::vector<std::vector<std::size_t>> weight_users_;
  std::vector<std::vector<std::size_t>> recurrent_users_;
};

}  // namespace lp
