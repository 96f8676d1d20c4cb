#include "lp/graph.hpp"

#include <string>

#include "lp/error.hpp"

namespace lp {

ConstraintGraph::ConstraintGraph(NetworkSpec spec, std::vector<ConstraintNode> nodes, std::vector<LossTap> taps)
    : spec_(std::move(spec)), nodes_(std::move(nodes)), taps_(std::move(taps)) {
  spec_.validate();
  const std::size_t h = spec_.hidden_layers();
  variables_.resize(nodes_.size());
  weight_users_.resize(h + 1);
  recurrent_users_.resize(spec_.arch == Arch::Rnn ? h : 0);

  std::vector<bool> defined(nodes_.size(), false);
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const auto& n = nodes_[id];
    if (n.id != id || n.output != id) throw Error("constraint graph: node ids must equal their output slots");
    if (n.layer < 1 || static_cast<std::size_t>(n.layer) > h) throw Error("constraint graph: node layer out of range");
    if (defined[n.output]) throw Error("constraint graph: variable defined by two nodes");
    defined[n.output] = true;
    auto& v = variables_[n.output];
    v.layer = n.layer;
    v.time = n.time;
    v.width = spec_.widths[static_cast<std::size_t>(n.layer)];
    v.defining_node = id;
    if (n.weight >= h) throw Error("constraint graph: hidden node uses output weight");
    weight_users_[n.weight].push_back(id);
    if (n.recurrent_weight) recurrent_users_.at(*n.recurrent_weight).push_back(id);
  }

  for (const auto& n : nodes_) {
    for (const auto& op : n.inputs) {
      if (op.source == Operand::Source::State) {
        auto& consumers = variables_.at(op.index).consumers;
        if (consumers.empty() || consumers.back() != n.id) consumers.push_back(n.id);
      }
      // all summed inputs must share the width W expects
      if (operand_width(op) != spec_.widths[static_cast<std::size_t>(n.layer - 1)]) {
        throw DimensionError("constraint graph: input width mismatch at node " + std::to_string(n.id));
      }
    }
    if (n.previous) {
      auto& consumers = variables_.at(*n.previous).consumers;
      if (consumers.empty() || consumers.back() != n.id) consumers.push_back(n.id);
    }
  }
  for (std::size_t t = 0; t < taps_.size(); ++t) {
    for (const auto& op : taps_[t].top) {
      if (op.source == Operand::Source::State) variables_.at(op.index).loss_taps.push_back(t);
      if (operand_width(op) != spec_.widths.back()) throw DimensionError("constraint graph: loss input width mismatch");
    }
  }
}

int ConstraintGraph::operand_layer(const Operand& op) const {
  return op.source == Operand::Source::Input ? 0 : variables_[op.index].layer;
}

int ConstraintGraph::operand_time(const Operand& op) const {
  if (op.source == Operand::Source::State) return variables_[op.index].time;
  return spec_.arch == Arch::Rnn ? static_cast<int>(op.index) + 1 : 0;
}

std::size_t ConstraintGraph::operand_width(const Operand& op) const {
  return op.source == Operand::Source::Input ? spec_.widths.front() : variables_.at(op.index).width;
}

std::string ConstraintGraph::variable_name(std::size_t slot) const {
  const auto& v = variables_.at(slot);
  std::string name = "x[layer=" + std::to_string(v.layer);
  if (spec_.arch == Arch::Rnn) name += ",t=" + std::to_string(v.time);
  return name + "]";
}

}  // namespace lp
