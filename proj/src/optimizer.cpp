#include "lp/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "lp/architectures.hpp"
#include "lp/error.hpp"
#include "lp/functions.hpp"
#include "lp/rng.hpp"

namespace lp {

void TrainConfig::validate() const {
  auto positive = [](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "step size must be finite and > 0");
  };
  positive(eta_w, "train.eta_w");
  positive(eta_x, "train.eta_x");
  positive(eta_lambda, "train.eta_lambda");
  if (max_iters < 0) throw ConfigError("train.max_iters", "must be >= 0");
  if (std::isnan(target_residual) || target_residual < 0.0) {
    throw ConfigError("train.target_residual", "must be >= 0");
  }
  if (log_every < 1) throw ConfigError("train.log_every", "must be >= 1");
}

namespace {

// Forward values of every state variable for one example, in slot order.
std::vector<Vector> forward_states(const ConstraintGraph& graph, const WeightStore& weights,
                                   const std::vector<Vector>& input) {
  const auto& spec = graph.spec();
  std::vector<Vector> x(graph.variables().size());
  auto operand = [&](const Operand& op) -> const Vector& {
    if (op.source == Operand::Source::State) return x[op.index];
    if (op.index >= input.size()) throw DimensionError("input sequence shorter than the network's unrolled length");
    if (input[op.index].size() != spec.input_width()) {
      throw DimensionError("input width " + std::to_string(input[op.index].size()) + " does not match network input width " +
                           std::to_string(spec.input_width()));
    }
    return input[op.index];
  };
  auto layer_input = [&](std::span<const Operand> ops) {
    Vector in = operand(ops.front());
    for (std::size_t k = 1; k < ops.size(); ++k) linalg::axpy(1.0, operand(ops[k]), in);
    if (spec.bias) in.push_back(1.0);
    return in;
  };
  // node order is a topological order for every builder
  for (const auto& node : graph.nodes()) {
    const Vector in = layer_input(node.inputs);
    Vector a = linalg::matvec(weights.w(node.weight), in);
    if (node.previous) linalg::axpy(1.0, linalg::matvec(weights.u(*node.recurrent_weight), x[*node.previous]), a);
    Vector out = activate(spec.activation, a);
    if (node.form == NodeForm::ResidualDirect) {
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = in[k] + out[k];
    }
    x[node.output] = std::move(out);
  }
  return x;
}

Vector output_of(const ConstraintGraph& graph, const WeightStore& weights, const std::vector<Vector>& x,
                 const std::vector<Vector>& input, const LossTap& tap) {
  Vector top;
  for (const auto& op : tap.top) {
    const Vector& v = op.source == Operand::Source::State ? x[op.index] : input.at(op.index);
    if (top.empty()) {
      top = v;
    } else {
      linalg::axpy(1.0, v, top);
    }
  }
  if (graph.spec().bias) top.push_back(1.0);
  return linalg::matvec(weights.w(graph.output_weight()), top);
}

bool plateaued(const std::vector<IterMetrics>& history) {
  constexpr std::size_t kWindow = 100;
  constexpr double kRelative = 1e-6;
  if (history.size() <= kWindow) return false;
  const double now = history.back().loss_term;
  const double then = history[history.size() - 1 - kWindow].loss_term;
  return std::abs(now - then) <= kRelative * std::max(std::abs(then), 1e-12);
}

}  // namespace

std::optional<std::string> find_nonfinite(const Problem& problem, const Gradient& grad,
                                          std::span<const std::size_t> examples) {
  for (std::size_t k = 0; k < grad.w.size(); ++k)
    if (!linalg::all_finite(grad.w[k].data())) return "W[" + std::to_string(k) + "]";
  for (std::size_t k = 0; k < grad.u.size(); ++k)
    if (!linalg::all_finite(grad.u[k].data())) return "U[" + std::to_string(k) + "]";
  for (std::size_t i : examples) {
    for (std::size_t s = 0; s < grad.x[i].size(); ++s)
      if (!linalg::all_finite(grad.x[i][s])) {
        return problem.graph.variable_name(s) + " of example " + std::to_string(i);
      }
    for (std::size_t n = 0; n < grad.lambda[i].size(); ++n)
      if (!linalg::all_finite(grad.lambda[i][n])) {
        return "lambda" + problem.graph.variable_name(n).substr(1) + " of example " + std::to_string(i);
      }
  }
  return std::nullopt;
}

void update_weight(WeightStore& weights, const Gradient& grad, std::size_t k, const TrainConfig& config) {
  linalg::axpy(-config.eta_w, grad.w[k], weights.w_mut(k));
}

void update_recurrent(WeightStore& weights, const Gradient& grad, std::size_t k, const TrainConfig& config) {
  linalg::axpy(-config.eta_w, grad.u[k], weights.u_mut(k));
}

void update_state(StateStore& states, const Gradient& grad, std::size_t example, std::size_t slot,
                  const TrainConfig& config) {
  linalg::axpy(-config.eta_x, grad.x[example][slot], states.x_mut(example, slot));
}

void update_multiplier(StateStore& states, const Gradient& grad, std::size_t example, std::size_t node,
                       const TrainConfig& config) {
  linalg::axpy(config.eta_lambda, grad.lambda[example][node], states.lambda_mut(example, node));
}

IterMetrics to_metrics(long iter, const LagrangianSummary& summary, std::optional<double> accuracy) {
  IterMetrics m;
  m.iter = iter;
  m.lagrangian = summary.lagrangian;
  m.loss_term = summary.loss_term;
  m.max_abs_residual = summary.max_abs_residual;
  m.mean_abs_residual = summary.mean_abs_residual;
  m.lambda_l1 = summary.lambda_l1;
  m.train_accuracy = accuracy;
  return m;
}

IterMetrics step(const Problem& problem, StateStore& states, WeightStore& weights, const Dataset& data,
                 const TrainConfig& config, long iter, const StepOptions& options) {
  std::vector<std::size_t> everything;
  auto examples = options.examples;
  if (examples.empty()) {
    everything = all_examples(data.size());
    examples = everything;
  }

  std::optional<double> acc;
  if (options.compute_accuracy) acc = accuracy(problem.graph, weights, data);

  Gradient grad;
  LagrangianSummary summary;
  {
    TermCache terms(problem, states, weights, data);
    summary = summarize(terms, examples);
    grad = full_gradient(terms, examples);
  }
  if (!std::isfinite(summary.lagrangian)) throw DivergenceError("lagrangian", iter);
  if (auto bad = find_nonfinite(problem, grad, examples)) throw DivergenceError(*bad, iter);

  for (std::size_t k = 0; k < grad.w.size(); ++k) update_weight(weights, grad, k, config);
  for (std::size_t k = 0; k < grad.u.size(); ++k) update_recurrent(weights, grad, k, config);
  for (std::size_t i : examples) {
    for (std::size_t s = 0; s < grad.x[i].size(); ++s) update_state(states, grad, i, s, config);
    for (std::size_t n = 0; n < grad.lambda[i].size(); ++n) update_multiplier(states, grad, i, n, config);
  }
  return to_metrics(iter, summary, acc);
}

IterMetrics evaluate(const Problem& problem, const StateStore& states, const WeightStore& weights,
                     const Dataset& data, long iter) {
  TermCache terms(problem, states, weights, data);
  const auto examples = all_examples(data.size());
  return to_metrics(iter, summarize(terms, examples), accuracy(problem.graph, weights, data));
}

TrainRun train(const Problem& problem, const Dataset& data, const TrainConfig& config, const TrainHooks& hooks) {
  config.validate();
  problem.reg.validate();
  data.validate();

  TrainRun run;
  run.states = StateStore(problem.graph, data.size());
  run.weights = hooks.initial_weights ? *hooks.initial_weights : WeightStore::random(problem.graph.spec(), config.seed);
  run.weights.check_shapes(problem.graph.spec());

  Stepper stepper = hooks.stepper;
  if (!stepper) {
    stepper = [&](StateStore& s, WeightStore& w, long iter, const StepOptions& opts) {
      return step(problem, s, w, data, config, iter, opts);
    };
  }

  const bool mini_batch = config.batch_size > 0 && config.batch_size < data.size();
  Rng batch_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> pool = all_examples(data.size());
  std::vector<std::size_t> batch;

  for (long it = 0; it < config.max_iters; ++it) {
    StepOptions opts;
    const bool log_now = it % config.log_every == 0 || it + 1 == config.max_iters;
    opts.compute_accuracy = log_now;
    if (mini_batch) {
      // partial Fisher-Yates, then ascending order for a fixed summation order
      for (std::size_t k = 0; k < config.batch_size; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(batch_rng.below(pool.size() - k));
        std::swap(pool[k], pool[j]);
      }
      batch.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(config.batch_size));
      std::sort(batch.begin(), batch.end());
      opts.examples = batch;
    }

    run.history.push_back(stepper(run.states, run.weights, it, opts));
    run.iterations = it + 1;
    const auto& m = run.history.back();
    if (log_now && hooks.on_log) hooks.on_log(m);

    if (m.max_abs_residual <= config.target_residual && plateaued(run.history)) {
      run.reason = StopReason::Converged;
      if (!log_now && hooks.on_log) hooks.on_log(m);
      break;
    }
  }
  run.final = evaluate(problem, run.states, run.weights, data, run.iterations);
  return run;
}

Vector infer(const ConstraintGraph& graph, const WeightStore& weights, const std::vector<Vector>& input) {
  weights.check_shapes(graph.spec());
  const auto x = forward_states(graph, weights, input);
  return output_of(graph, weights, x, input, graph.loss_taps().back());
}

Vector infer(const WeightStore& weights, const NetworkSpec& spec, const std::vector<Vector>& input) {
  return infer(build_graph(spec), weights, input);
}

void project_to_feasible(const ConstraintGraph& graph, StateStore& states, const WeightStore& weights,
                         const Dataset& data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto x = forward_states(graph, weights, data.inputs[i]);
    for (std::size_t s = 0; s < x.size(); ++s) states.x_mut(i, s) = std::move(x[s]);
  }
}

std::size_t predicted_class(std::span<const double> output) {
  if (output.size() == 1) return output[0] >= 0.5 ? 1 : 0;
  return static_cast<std::size_t>(std::max_element(output.begin(), output.end()) - output.begin());
}

double accuracy(const ConstraintGraph& graph, const WeightStore& weights, const Dataset& data) {
  if (data.size() == 0) return 1.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vector out = infer(graph, weights, data.inputs[i]);
    if (predicted_class(out) == predicted_class(data.targets[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace lp
