#include "lp/architectures.hpp"

#include "lp/error.hpp"

namespace lp {

namespace {

std::vector<LossTap> single_tap(std::vector<Operand> top) { return {LossTap{std::move(top), std::nullopt, 0}}; }

ConstraintGraph build_chain(const NetworkSpec& spec, NodeForm form) {
  const std::size_t h = spec.hidden_layers();
  std::vector<ConstraintNode> nodes;
  for (std::size_t l = 1; l <= h; ++l) {
    ConstraintNode n;
    n.id = l - 1;
    n.output = l - 1;
    n.form = form;
    n.layer = static_cast<int>(l);
    n.weight = l - 1;
    n.inputs = {l == 1 ? Operand::input(0) : Operand::state(l - 2)};
    nodes.push_back(std::move(n));
  }
  return ConstraintGraph(spec, std::move(nodes), single_tap({Operand::state(h - 1)}));
}

ConstraintGraph build_tilde(const NetworkSpec& spec) {
  const std::size_t h = spec.hidden_layers();
  std::vector<ConstraintNode> nodes;
  std::vector<Operand> below{Operand::input(0)};
  for (std::size_t l = 1; l <= h; ++l) {
    ConstraintNode n;
    n.id = l - 1;
    n.output = l - 1;
    n.form = NodeForm::ResidualTilde;
    n.layer = static_cast<int>(l);
    n.weight = l - 1;
    n.inputs = below;
    nodes.push_back(std::move(n));
    below.push_back(Operand::state(l - 1));
  }
  return ConstraintGraph(spec, std::move(nodes), single_tap(std::move(below)));
}

ConstraintGraph build_rnn(const NetworkSpec& spec) {
  const std::size_t h = spec.hidden_layers();
  const std::size_t steps = spec.seq_len;
  auto slot = [steps](std::size_t l, std::size_t t) { return (l - 1) * steps + (t - 1); };

  std::vector<ConstraintNode> nodes;
  for (std::size_t l = 1; l <= h; ++l) {
    for (std::size_t t = 1; t <= steps; ++t) {
      ConstraintNode n;
      n.id = slot(l, t);
      n.output = n.id;
      n.form = NodeForm::Recurrent;
      n.layer = static_cast<int>(l);
      n.time = static_cast<int>(t);
      n.weight = l - 1;
      n.recurrent_weight = l - 1;
      n.inputs = {l == 1 ? Operand::input(t - 1) : Operand::state(slot(l - 1, t))};
      if (t > 1) n.previous = slot(l, t - 1);
      nodes.push_back(std::move(n));
    }
  }
  std::vector<LossTap> taps;
  if (spec.supervision == Supervision::FinalStep) {
    taps.push_back({{Operand::state(slot(h, steps))}, std::nullopt, static_cast<int>(steps)});
  } else {
    for (std::size_t t = 1; t <= steps; ++t) taps.push_back({{Operand::state(slot(h, t))}, t - 1, static_cast<int>(t)});
  }
  return ConstraintGraph(spec, std::move(nodes), std::move(taps));
}

}  // namespace

ConstraintGraph build_graph(const NetworkSpec& spec) {
  spec.validate();
  switch (spec.arch) {
    case Arch::Mlp: return build_chain(spec, NodeForm::Feedforward);
    case Arch::ResNetDirect: return build_chain(spec, NodeForm::ResidualDirect);
    case Arch::ResNetTilde: return build_tilde(spec);
    case Arch::Rnn: return build_rnn(spec);
  }
  throw ConfigError("network.arch", "unsupported architecture");
}

std::vector<Vector> tilde_map(const std::vector<Vector>& layers) {
  std::vector<Vector> out;
  out.reserve(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (l == 0) {
      out.push_back(layers[0]);
      continue;
    }
    if (layers[l].size() != layers[l - 1].size()) throw DimensionError("tilde_map: layer widths differ");
    Vector d(layers[l].size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = layers[l][k] - layers[l - 1][k];
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Vector> tilde_unmap(const std::vector<Vector>& tilde) {
  std::vector<Vector> out;
  out.reserve(tilde.size());
  for (std::size_t l = 0; l < tilde.size(); ++l) {
    if (l == 0) {
      out.push_back(tilde[0]);
      continue;
    }
    if (tilde[l].size() != out.back().size()) throw DimensionError("tilde_unmap: layer widths differ");
    Vector s = out.back();
    for (std::size_t k = 0; k < s.size(); ++k) s[k] += tilde[l][k];
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace lp
