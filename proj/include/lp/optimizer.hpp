#pragma once

// Saddle-point training: simultaneous gradient descent on (W, X) and ascent
// on Lambda, every partial taken from the same pre-step snapshot (Jacobi).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lp/data.hpp"
#include "lp/lagrangian.hpp"
#include "lp/stores.hpp"

namespace lp {

struct TrainConfig {
  double eta_w = 0.01;
  double eta_x = 0.01;
  double eta_lambda = 0.1;
  long max_iters = 1000;
  /// Stop once max |residual| <= target and the loss has plateaued.
  double target_residual = 1e-3;
  std::uint64_t seed = 0;
  long log_every = 100;
  /// 0 = full batch. Otherwise each step updates W from, and moves x/lambda
  /// of, a random subset of this many examples (experimental).
  std::size_t batch_size = 0;

  void validate() const;
};

struct IterMetrics {
  long iter = 0;
  double lagrangian = 0.0;
  double loss_term = 0.0;
  double max_abs_residual = 0.0;
  double mean_abs_residual = 0.0;
  double lambda_l1 = 0.0;
  std::optional<double> train_accuracy;

  bool operator==(const IterMetrics&) const = default;
};

struct StepOptions {
  bool compute_accuracy = false;
  /// Examples whose terms enter this step; empty means all.
  std::span<const std::size_t> examples;
};

/// One Jacobi step. Returns metrics of the pre-step snapshot. Throws
/// DivergenceError naming the first non-finite partial, before any update.
IterMetrics step(const Problem& problem, StateStore& states, WeightStore& weights, const Dataset& data,
                 const TrainConfig& config, long iter, const StepOptions& options = {});

// Step building blocks, shared with the layer-parallel executor.
std::optional<std::string> find_nonfinite(const Problem& problem, const Gradient& grad,
                                          std::span<const std::size_t> examples);
void update_weight(WeightStore& weights, const Gradient& grad, std::size_t k, const TrainConfig& config);
void update_recurrent(WeightStore& weights, const Gradient& grad, std::size_t k, const TrainConfig& config);
void update_state(StateStore& states, const Gradient& grad, std::size_t example, std::size_t slot,
                  const TrainConfig& config);
void update_multiplier(StateStore& states, const Gradient& grad, std::size_t example, std::size_t node,
                       const TrainConfig& config);
IterMetrics to_metrics(long iter, const LagrangianSummary& summary, std::optional<double> accuracy);

enum class StopReason { MaxIters, Converged };

struct TrainRun {
  std::vector<IterMetrics> history;  // one entry per executed step
  IterMetrics final;                 // evaluated on the final stores
  StateStore states;
  WeightStore weights;
  long iterations = 0;
  StopReason reason = StopReason::MaxIters;
};

using Stepper = std::function<IterMetrics(StateStore&, WeightStore&, long, const StepOptions&)>;

struct TrainHooks {
  /// Replaces the sequential step (e.g. with a layer-parallel executor).
  Stepper stepper;
  /// Called for every logged iteration (multiples of log_every and the last).
  std::function<void(const IterMetrics&)> on_log;
  /// Starting weights; default is WeightStore::random(spec, config.seed).
  std::optional<WeightStore> initial_weights;
};

/// Zero-initialized X and Lambda, seeded random W, then steps until
/// max_iters or convergence.
TrainRun train(const Problem& problem, const Dataset& data, const TrainConfig& config, const TrainHooks& hooks = {});

/// Metrics of the current stores without stepping (accuracy included).
IterMetrics evaluate(const Problem& problem, const StateStore& states, const WeightStore& weights,
                     const Dataset& data, long iter);

/// Classic forward pass, G ignored; returns W_H top at the final step.
Vector infer(const ConstraintGraph& graph, const WeightStore& weights, const std::vector<Vector>& input);
Vector infer(const WeightStore& weights, const NetworkSpec& spec, const std::vector<Vector>& input);

/// Sets every state to its forward-pass value, making all residuals zero.
void project_to_feasible(const ConstraintGraph& graph, StateStore& states, const WeightStore& weights,
                         const Dataset& data);

/// Predicted class: argmax for multi-output nets, output >= 0.5 for one output.
std::size_t predicted_class(std::span<const double> output);

/// Fraction of examples whose forward-pass prediction matches the target class.
double accuracy(const ConstraintGraph& graph, const WeightStore& weights, const Dataset& data);

}  // namespace lp
