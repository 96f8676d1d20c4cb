#pragma once

#include <cstdint>
#include <memory>

#include "lp/architectures.hpp"
#include "lp/lagrangian.hpp"
#include "lp/rng.hpp"
#include "lp/stores.hpp"

namespace lp::testing {

/// A self-contained random LP problem. Held by pointer: TermCache and
/// friends keep references into it.
struct Instance {
  Problem problem;
  Dataset data;
  StateStore states;
  WeightStore weights;
};

inline Dataset random_dataset(const NetworkSpec& spec, std::size_t n, Rng& rng) {
  Dataset data;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Vector> seq(spec.seq_len, Vector(spec.input_width()));
    for (auto& step : seq)
      for (double& v : step) v = rng.uniform(-1.0, 1.0);
    data.inputs.push_back(std::move(seq));
    Vector y(spec.output_width);
    if (spec.loss == LossKind::SoftmaxCrossEntropy) {
      y[rng.below(spec.output_width)] = 1.0;
    } else {
      for (double& v : y) v = rng.uniform(-1.0, 1.0);
    }
    if (spec.arch == Arch::Rnn && spec.supervision == Supervision::EveryStep) {
      std::vector<Vector> steps(spec.seq_len, Vector(spec.output_width));
      for (auto& s : steps)
        for (double& v : s) v = rng.uniform(-1.0, 1.0);
      steps.back() = y;
      data.step_targets.push_back(std::move(steps));
    }
    data.targets.push_back(std::move(y));
  }
  return data;
}

inline void randomize_states(StateStore& states, Rng& rng, double scale = 0.5) {
  for (std::size_t i = 0; i < states.examples(); ++i) {
    for (std::size_t v = 0; v < states.variables(); ++v)
      for (double& x : states.x_mut(i, v)) x = rng.uniform(-scale, scale);
    for (std::size_t n = 0; n < states.nodes(); ++n)
      for (double& l : states.lambda_mut(i, n)) l = rng.uniform(-scale, scale);
  }
}

inline std::unique_ptr<Instance> make_instance(const NetworkSpec& spec, ConstraintKind g, RegConfig reg,
                                               std::size_t n, std::uint64_t seed, bool random_states = true) {
  Rng rng(seed);
  auto inst = std::make_unique<Instance>(Instance{Problem{build_graph(spec), g, reg}, {}, {}, {}});
  inst->data = random_dataset(spec, n, rng);
  inst->weights = WeightStore::random(spec, seed + 7);
  inst->states = StateStore(inst->problem.graph, n);
  if (random_states) randomize_states(inst->states, rng);
  return inst;
}

inline NetworkSpec mlp_spec(std::vector<std::size_t> widths, std::size_t out,
                            ActivationKind act = ActivationKind::Tanh, bool bias = false) {
  NetworkSpec spec;
  spec.arch = Arch::Mlp;
  spec.widths = std::move(widths);
  spec.output_width = out;
  spec.activation = act;
  spec.bias = bias;
  return spec;
}

/// Random spec for the given architecture with widths <= max_width and H <= max_h.
inline NetworkSpec random_spec(Arch arch, Rng& rng, std::size_t max_width = 6, std::size_t max_h = 3) {
  NetworkSpec spec;
  spec.arch = arch;
  const std::size_t h = 1 + rng.below(max_h);
  const bool equal = arch == Arch::ResNetDirect || arch == Arch::ResNetTilde;
  const std::size_t common = 1 + rng.below(max_width);
  for (std::size_t l = 0; l <= h; ++l) spec.widths.push_back(equal ? common : 1 + rng.below(max_width));
  spec.output_width = 1 + rng.below(3);
  const ActivationKind acts[] = {ActivationKind::Tanh, ActivationKind::Sigmoid, ActivationKind::ReLU};
  spec.activation = acts[rng.below(3)];
  spec.loss = spec.output_width > 1 && rng.coin() ? LossKind::SoftmaxCrossEntropy : LossKind::SquaredError;
  spec.bias = rng.coin();
  if (arch == Arch::Rnn) {
    spec.seq_len = 1 + rng.below(4);
    spec.supervision = rng.coin() ? Supervision::EveryStep : Supervision::FinalStep;
  }
  return spec;
}

}  // namespace lp::testing

#include <optional>

#include "lp/trace.hpp"

namespace lp::testing {

/// First read event outside layers [lo, hi] (and, when given, outside times
/// [tlo, thi] for time-indexed reads), if any.
inline std::optional<trace::Event> read_outside(const trace::Recorder& rec, int lo, int hi,
                                                std::optional<std::pair<int, int>> times = std::nullopt) {
  for (const auto& e : rec.events) {
    if (trace::is_write(e.access)) continue;
    if (e.layer < lo || e.layer > hi) return e;
    const bool shared = e.access == trace::Access::ReadWeight || e.access == trace::Access::ReadRecurrentWeight;
    if (times && !shared && (e.time < times->first || e.time > times->second)) return e;
  }
  return std::nullopt;
}

}  // namespace lp::testing
