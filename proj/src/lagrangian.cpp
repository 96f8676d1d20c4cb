#include "lp/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lp/error.hpp"
#include "lp/functions.hpp"
#include "lp/trace.hpp"

namespace lp {

void RegConfig::validate() const {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw ConfigError("reg.rho", "must be finite and >= 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("reg.alpha", "must be finite and >= 0");
}

std::vector<std::size_t> all_examples(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

namespace {

const Vector& read_operand(const ConstraintGraph& graph, const StateStore& states, const Dataset& data,
                           std::size_t example, const Operand& op) {
  if (op.source == Operand::Source::State) return states.x(example, op.index);
  trace::record(trace::Access::ReadInput, example, 0, graph.operand_time(op));
  const auto& seq = data.inputs.at(example);
  if (op.index >= seq.size()) throw DimensionError("input sequence shorter than the unrolled network");
  const auto& v = seq[op.index];
  if (v.size() != graph.spec().input_width()) {
    throw DimensionError("input width " + std::to_string(v.size()) + " does not match network input width " +
                         std::to_string(graph.spec().input_width()));
  }
  return v;
}

Vector summed_input(const ConstraintGraph& graph, const StateStore& states, const Dataset& data, std::size_t example,
                    std::span<const Operand> operands) {
  Vector in = read_operand(graph, states, data, example, operands.front());
  for (std::size_t k = 1; k < operands.size(); ++k) {
    linalg::axpy(1.0, read_operand(graph, states, data, example, operands[k]), in);
  }
  if (graph.spec().bias) in.push_back(1.0);
  return in;
}

// W^T v restricted to the first `width` components (drops the bias row).
Vector transposed_product(const Matrix& m, std::span<const double> v, std::size_t width) {
  Vector out = linalg::matvec_transposed(m, v);
  out.resize(width);
  return out;
}

struct Forward {
  Vector input;
  Vector previous;
  Vector pre_activation;
  Vector argument;
  Vector residual;
};

Forward node_forward(const Problem& problem, const StateStore& states, const WeightStore& weights,
                     const Dataset& data, std::size_t example, std::size_t id) {
  const auto& graph = problem.graph;
  const auto& node = graph.node(id);
  const auto activation = graph.spec().activation;

  Forward f;
  f.input = summed_input(graph, states, data, example, node.inputs);
  f.pre_activation = linalg::matvec(weights.w(node.weight), f.input);
  if (node.previous) {
    f.previous = states.x(example, *node.previous);
    linalg::axpy(1.0, linalg::matvec(weights.u(*node.recurrent_weight), f.previous), f.pre_activation);
  }
  const Vector& out = states.x(example, node.output);
  if (out.size() != f.pre_activation.size()) throw DimensionError("state width does not match weight rows");

  f.argument.resize(out.size());
  f.residual.resize(out.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    double base = activate(activation, f.pre_activation[k]);
    if (node.form == NodeForm::ResidualDirect) base = f.input[k] + base;
    f.argument[k] = out[k] - base;
    f.residual[k] = problem.constraint.value(f.argument[k]);
  }
  return f;
}

const Vector& tap_target(const ConstraintGraph& graph, const Dataset& data, std::size_t example, const LossTap& tap) {
  trace::record(trace::Access::ReadTarget, example, static_cast<int>(graph.hidden_layers()) + 1, tap.time);
  if (tap.step) {
    if (data.step_targets.empty()) throw DimensionError("every-step supervision needs per-step targets");
    return data.step_targets.at(example).at(*tap.step);
  }
  return data.targets.at(example);
}

struct LossForward {
  Vector top;
  Vector output;
  double value = 0.0;
};

LossForward loss_forward(const Problem& problem, const StateStore& states, const WeightStore& weights,
                         const Dataset& data, std::size_t example, std::size_t tap_index) {
  const auto& graph = problem.graph;
  const auto& tap = graph.loss_taps()[tap_index];
  LossForward f;
  f.top = summed_input(graph, states, data, example, tap.top);
  f.output = linalg::matvec(weights.w(graph.output_weight()), f.top);
  f.value = loss_value(graph.spec().loss, f.output, tap_target(graph, data, example, tap));
  return f;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// lambda . G + rho ||G||^2 for one node.
double constraint_piece(const Vector& lambda, const Vector& r, double rho) {
  return linalg::dot(lambda, r) + rho * linalg::dot(r, r);
}

// Shared reduction order: per example, loss taps, then nodes, then the L1 term.
template <typename LossAt, typename ResidualAt>
LagrangianSummary reduce(const Problem& problem, const StateStore& states, std::span<const std::size_t> examples,
                         LossAt loss_at, ResidualAt residual_at) {
  const auto& graph = problem.graph;
  LagrangianSummary s;
  std::size_t components = 0;
  double abs_sum = 0.0;
  for (std::size_t i : examples) {
    double acc = 0.0;
    for (std::size_t t = 0; t < graph.loss_taps().size(); ++t) {
      const double v = loss_at(i, t);
      acc += v;
      s.loss_term += v;
    }
    for (const auto& node : graph.nodes()) {
      const Vector& r = residual_at(i, node.id);
      const Vector& lambda = states.lambda(i, node.id);
      acc += constraint_piece(lambda, r, problem.reg.rho);
      for (double v : r) {
        s.max_abs_residual = std::max(s.max_abs_residual, std::abs(v));
        abs_sum += std::abs(v);
      }
      components += r.size();
      s.lambda_l1 += linalg::l1_norm(lambda);
    }
    for (std::size_t slot = 0; slot < graph.variables().size(); ++slot) {
      acc += problem.reg.alpha * linalg::l1_norm(states.x(i, slot));
    }
    s.lagrangian += acc;
  }
  s.mean_abs_residual = components == 0 ? 0.0 : abs_sum / static_cast<double>(components);
  return s;
}

}  // namespace

NodeTerm compute_node_term(const Problem& problem, const StateStore& states, const WeightStore& weights,
                           const Dataset& data, std::size_t example, std::size_t id) {
  const auto& graph = problem.graph;
  const auto& node = graph.node(id);
  Forward f = node_forward(problem, states, weights, data, example, id);

  NodeTerm t;
  const Vector& lambda = states.lambda(example, id);
  const double two_rho = 2.0 * problem.reg.rho;
  const std::size_t n = f.residual.size();
  t.multiplier.resize(n);
  t.delta.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double shifted = lambda[k] + two_rho * f.residual[k];
    t.multiplier[k] = shifted * problem.constraint.derivative(f.argument[k]);
    t.delta[k] = t.multiplier[k] * activate_derivative(graph.spec().activation, f.pre_activation[k]);
  }
  const std::size_t in_width = graph.spec().widths[static_cast<std::size_t>(node.layer - 1)];
  t.input_grad = linalg::scale(-1.0, transposed_product(weights.w(node.weight), t.delta, in_width));
  if (node.previous) {
    t.previous_grad =
        linalg::scale(-1.0, transposed_product(weights.u(*node.recurrent_weight), t.delta, f.previous.size()));
  }
  t.input = std::move(f.input);
  t.previous = std::move(f.previous);
  t.pre_activation = std::move(f.pre_activation);
  t.argument = std::move(f.argument);
  t.residual = std::move(f.residual);
  return t;
}

LossTerm compute_loss_term(const Problem& problem, const StateStore& states, const WeightStore& weights,
                           const Dataset& data, std::size_t example, std::size_t tap) {
  const auto& graph = problem.graph;
  LossForward f = loss_forward(problem, states, weights, data, example, tap);
  LossTerm t;
  t.output_grad = loss_grad(graph.spec().loss, f.output, tap_target(graph, data, example, graph.loss_taps()[tap]));
  t.top_grad = transposed_product(weights.w(graph.output_weight()), t.output_grad, graph.spec().widths.back());
  t.top = std::move(f.top);
  t.output = std::move(f.output);
  t.value = f.value;
  return t;
}

TermCache::TermCache(const Problem& problem, const StateStore& states, const WeightStore& weights,
                     const Dataset& data)
    : problem_(problem), states_(states), weights_(weights), data_(data) {
  if (states.examples() != data.size()) {
    throw DimensionError("state store holds " + std::to_string(states.examples()) + " examples, dataset has " +
                         std::to_string(data.size()));
  }
  nodes_.assign(states.examples(), std::vector<std::optional<NodeTerm>>(problem.graph.nodes().size()));
  losses_.assign(states.examples(), std::vector<std::optional<LossTerm>>(problem.graph.loss_taps().size()));
}

void TermCache::fill_node(std::size_t example, std::size_t node) {
  auto& slot = nodes_.at(example).at(node);
  if (!slot) slot = compute_node_term(problem_, states_, weights_, data_, example, node);
}

void TermCache::fill_loss(std::size_t example, std::size_t tap) {
  auto& slot = losses_.at(example).at(tap);
  if (!slot) slot = compute_loss_term(problem_, states_, weights_, data_, example, tap);
}

const NodeTerm& TermCache::node(std::size_t example, std::size_t node) {
  const auto& n = problem_.graph.node(node);
  trace::record(trace::Access::ReadNodeTerm, example, n.layer, n.time);
  fill_node(example, node);
  return *nodes_[example][node];
}

const LossTerm& TermCache::loss(std::size_t example, std::size_t tap) {
  trace::record(trace::Access::ReadNodeTerm, example, static_cast<int>(problem_.graph.hidden_layers()) + 1,
                problem_.graph.loss_taps()[tap].time);
  fill_loss(example, tap);
  return *losses_[example][tap];
}

Vector residual(const Problem& problem, const StateStore& states, const WeightStore& weights, const Dataset& data,
                std::size_t example, std::size_t node) {
  return node_forward(problem, states, weights, data, example, node).residual;
}

double lagrangian_value(const Problem& problem, const StateStore& states, const WeightStore& weights,
                        const Dataset& data) {
  if (states.examples() != data.size()) throw DimensionError("state store and dataset sizes differ");
  Vector last_residual;
  const auto examples = all_examples(data.size());
  const auto s = reduce(
      problem, states, examples,
      [&](std::size_t i, std::size_t t) { return loss_forward(problem, states, weights, data, i, t).value; },
      [&](std::size_t i, std::size_t n) -> const Vector& {
        last_residual = residual(problem, states, weights, data, i, n);
        return last_residual;
      });
  if (!std::isfinite(s.lagrangian)) throw DivergenceError("lagrangian", -1);
  return s.lagrangian;
}

LagrangianSummary summarize(TermCache& terms, std::span<const std::size_t> examples) {
  return reduce(
      terms.problem(), terms.states(), examples, [&](std::size_t i, std::size_t t) { return terms.loss(i, t).value; },
      [&](std::size_t i, std::size_t n) -> const Vector& { return terms.node(i, n).residual; });
}

Matrix assemble_grad_w(TermCache& terms, std::span<const std::size_t> examples, std::size_t k) {
  const auto& graph = terms.problem().graph;
  const Matrix& w = terms.weights().w(k);
  Matrix g(w.rows(), w.cols());
  const bool output = k == graph.output_weight();
  for (std::size_t i : examples) {
    if (output) {
      for (std::size_t t = 0; t < graph.loss_taps().size(); ++t) {
        const auto& lt = terms.loss(i, t);
        linalg::add_outer(g, 1.0, lt.output_grad, lt.top);
      }
    } else {
      for (std::size_t n : graph.nodes_using_weight(k)) {
        const auto& nt = terms.node(i, n);
        linalg::add_outer(g, -1.0, nt.delta, nt.input);
      }
    }
  }
  return g;
}

Matrix assemble_grad_u(TermCache& terms, std::span<const std::size_t> examples, std::size_t k) {
  const auto& graph = terms.problem().graph;
  const Matrix& u = terms.weights().u(k);
  Matrix g(u.rows(), u.cols());
  for (std::size_t i : examples) {
    for (std::size_t n : graph.nodes_using_recurrent(k)) {
      if (!graph.node(n).previous) continue;  // x^0 = 0 contributes nothing
      const auto& nt = terms.node(i, n);
      linalg::add_outer(g, -1.0, nt.delta, nt.previous);
    }
  }
  return g;
}

Vector assemble_grad_x(TermCache& terms, std::size_t example, std::size_t slot) {
  const auto& problem = terms.problem();
  const auto& graph = problem.graph;
  const auto& var = graph.variable(slot);

  // own constraint: d/dx_out of lambda.G + rho||G||^2
  Vector g = terms.node(example, var.defining_node).multiplier;

  for (std::size_t c : var.consumers) {
    const auto& node = graph.node(c);
    const auto& nt = terms.node(example, c);
    if (node.previous && *node.previous == slot) linalg::axpy(1.0, nt.previous_grad, g);
    const bool is_input = std::any_of(node.inputs.begin(), node.inputs.end(),
                                      [slot](const Operand& op) { return op == Operand::state(slot); });
    if (!is_input) continue;
    if (node.form == NodeForm::ResidualDirect) linalg::axpy(-1.0, nt.multiplier, g);  // identity skip
    linalg::axpy(1.0, nt.input_grad, g);
  }
  for (std::size_t t : var.loss_taps) linalg::axpy(1.0, terms.loss(example, t).top_grad, g);

  if (problem.reg.alpha != 0.0) {
    const Vector& x = terms.states().x(example, slot);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += problem.reg.alpha * sign(x[k]);
  }
  return g;
}

Vector assemble_grad_lambda(TermCache& terms, std::size_t example, std::size_t node) {
  return terms.node(example, node).residual;
}

Matrix grad_w(const Problem& problem, const StateStore& states, const WeightStore& weights, const Dataset& data,
              std::size_t k) {
  if (k > problem.graph.output_weight()) throw DimensionError("grad_w: layer index out of range");
  TermCache terms(problem, states, weights, data);
  const auto examples = all_examples(data.size());
  return assemble_grad_w(terms, examples, k);
}

Matrix grad_u(const Problem& problem, const StateStore& states, const WeightStore& weights, const Dataset& data,
              std::size_t k) {
  if (k >= weights.recurrent_count()) throw DimensionError("grad_u: layer index out of range");
  TermCache terms(problem, states, weights, data);
  const auto examples = all_examples(data.size());
  return assemble_grad_u(terms, examples, k);
}

Vector grad_x(const Problem& problem, const StateStore& states, const WeightStore& weights, const Dataset& data,
              std::size_t example, std::size_t slot) {
  if (example >= states.examples() || slot >= problem.graph.variables().size()) {
    throw DimensionError("grad_x: unknown variable");
  }
  TermCache terms(problem, states, weights, data);
  return assemble_grad_x(terms, example, slot);
}

Vector grad_lambda(const Problem& problem, const StateStore& states, const WeightStore& weights, const Dataset& data,
                   std::size_t example, std::size_t node) {
  if (example >= states.examples() || node >= problem.graph.nodes().size()) {
    throw DimensionError("grad_lambda: unknown node");
  }
  TermCache terms(problem, states, weights, data);
  return assemble_grad_lambda(terms, example, node);
}

Gradient full_gradient(TermCache& terms, std::span<const std::size_t> examples) {
  const auto& graph = terms.problem().graph;
  const auto& weights = terms.weights();
  Gradient g;
  for (std::size_t k = 0; k < weights.weight_count(); ++k) g.w.push_back(assemble_grad_w(terms, examples, k));
  for (std::size_t k = 0; k < weights.recurrent_count(); ++k) g.u.push_back(assemble_grad_u(terms, examples, k));
  g.x.resize(terms.states().examples());
  g.lambda.resize(terms.states().examples());
  for (std::size_t i : examples) {
    g.x[i].resize(graph.variables().size());
    g.lambda[i].resize(graph.nodes().size());
    for (std::size_t s = 0; s < graph.variables().size(); ++s) g.x[i][s] = assemble_grad_x(terms, i, s);
    for (std::size_t n = 0; n < graph.nodes().size(); ++n) g.lambda[i][n] = assemble_grad_lambda(terms, i, n);
  }
  return g;
}

Gradient full_gradient(const Problem& problem, const StateStore& states, const WeightStore& weights,
                       const Dataset& data, std::span<const std::size_t> examples) {
  TermCache terms(problem, states, weights, data);
  return full_gradient(terms, examples);
}

std::vector<int> kink_signature(const Problem& problem, const StateStore& states, const WeightStore& weights,
                                const Dataset& data) {
  const auto& graph = problem.graph;
  const auto activation = graph.spec().activation;
  const double eps = problem.constraint.epsilon();
  const bool g_kinks = problem.constraint.kind() != ConstraintKind::Kind::Identity;
  auto region = [](double v, double at) { return v > at ? 1 : (v < at ? -1 : 0); };

  std::vector<int> sig;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (const auto& node : graph.nodes()) {
      const Forward f = node_forward(problem, states, weights, data, i, node.id);
      for (std::size_t k = 0; k < f.argument.size(); ++k) {
        if (g_kinks) {
          sig.push_back(region(f.argument[k], eps));
          sig.push_back(region(f.argument[k], -eps));
        }
        if (activation == ActivationKind::ReLU) sig.push_back(region(f.pre_activation[k], 0.0));
      }
    }
    if (problem.reg.alpha != 0.0) {
      for (std::size_t s = 0; s < graph.variables().size(); ++s)
        for (double v : states.x(i, s)) sig.push_back(region(v, 0.0));
    }
  }
  return sig;
}

}  // namespace lp
