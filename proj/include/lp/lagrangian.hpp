#pragma once

// The LP Lagrangian and its analytic partial derivatives.
//
//   L = sum_i V(W_H top_i, y_i)
//     + sum_{n,i} [ lambda_{n,i} . G_{n,i} + rho ||G_{n,i}||^2 ]
//     + alpha sum_{x,i} ||x_i||_1
//
// with G_{n,i} = G(x_out - base) the elementwise residual of node n on example
// i. Every partial is assembled from per-(example, node) NodeTerms, each of
// which reads only the node's output variable, its inputs and its weights.
// The augmented term enters as a shifted multiplier lambda + 2 rho G, so one
// code path serves both. Plain sums over examples (no 1/N averaging).

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lp/constraint_fn.hpp"
#include "lp/data.hpp"
#include "lp/graph.hpp"
#include "lp/linalg.hpp"
#include "lp/stores.hpp"

namespace lp {

struct RegConfig {
  double rho = 0.0;    // augmented-Lagrangian weight
  double alpha = 0.0;  // L1 weight on states
  void validate() const;
  bool operator==(const RegConfig&) const = default;
};

struct Problem {
  ConstraintGraph graph;
  ConstraintKind constraint;
  RegConfig reg;
};

/// Local quantities of one constraint node on one example.
struct NodeTerm {
  Vector input;          // summed layer input, bias-augmented when enabled
  Vector previous;       // recurrent state at t-1 (empty when absent)
  Vector pre_activation; // W input (+ U previous)
  Vector argument;       // x_out - base
  Vector residual;       // G(argument)
  Vector multiplier;     // (lambda + 2 rho G) . G'   == dL/dx_out from this node
  Vector delta;          // multiplier . sigma'(pre_activation)
  Vector input_grad;     // -W^T delta without the bias row
  Vector previous_grad;  // -U^T delta (recurrent only)
};

/// One loss tap on one example.
struct LossTerm {
  Vector top;          // bias-augmented loss input
  Vector output;       // W_H top
  double value = 0.0;  // V(output, y)
  Vector output_grad;  // V'(output, y)
  Vector top_grad;     // W_H^T V' without the bias row, shared by every top operand
};

/// Lazily computed NodeTerms/LossTerms over frozen stores.
///
/// Terms are computed on first request and reused; reading a term is traced
/// as a ReadNodeTerm at the node's layer (loss taps sit at layer H+1).
/// Concurrent readers are safe once the requested terms have been filled.
class TermCache {
 public:
  TermCache(const Problem& problem, const StateStore& states, const WeightStore& weights, const Dataset& data);

  const NodeTerm& node(std::size_t example, std::size_t node);
  const LossTerm& loss(std::size_t example, std::size_t tap);

  /// Computes without the read trace; used by the owner of the node.
  void fill_node(std::size_t example, std::size_t node);
  void fill_loss(std::size_t example, std::size_t tap);

  const Problem& problem() const noexcept { return problem_; }
  const StateStore& states() const noexcept { return states_; }
  const WeightStore& weights() const noexcept { return weights_; }
  const Dataset& data() const noexcept { return data_; }

 private:
  const Problem& problem_;
  const StateStore& states_;
  const WeightStore& weights_;
  const Dataset& data_;
  std::vector<std::vector<std::optional<NodeTerm>>> nodes_;
  std::vector<std::vector<std::optional<LossTerm>>> losses_;
};

NodeTerm compute_node_term(const Problem& problem, const StateStore& states, const WeightStore& weights,
                           const Dataset& data, std::size_t example, std::size_t node);
LossTerm compute_loss_term(const Problem& problem, const StateStore& states, const WeightStore& weights,
                           const Dataset& data, std::size_t example, std::size_t tap);

/// G applied to (x_out - base) for one node and example.
Vector residual(const Problem& problem, const StateStore& states, const WeightStore& weights, const Dataset& data,
                std::size_t example, std::size_t node);

double lagrangian_value(const Problem& problem, const StateStore& states, const WeightStore& weights,
                        const Dataset& data);

/// dL/dW_k summed over all examples (k = H is the output weight).
Matrix grad_w(const Problem& problem, const StateStore& states, const WeightStore& weights, const Dataset& data,
              std::size_t k);
/// dL/dU_k for recurrent graphs.
Matrix grad_u(const Problem& problem, const StateStore& states, const WeightStore& weights, const Dataset& data,
              std::size_t k);
/// dL/dx for one state variable of one example.
Vector grad_x(const Problem& problem, const StateStore& states, const WeightStore& weights, const Dataset& data,
              std::size_t example, std::size_t slot);
/// dL/dlambda = G, the ascent direction for the multiplier.
Vector grad_lambda(const Problem& problem, const StateStore& states, const WeightStore& weights, const Dataset& data,
                   std::size_t example, std::size_t node);

// Assembly from cached terms. The single-partial functions above are thin
// wrappers over these, so both routes produce identical bits.
Matrix assemble_grad_w(TermCache& terms, std::span<const std::size_t> examples, std::size_t k);
Matrix assemble_grad_u(TermCache& terms, std::span<const std::size_t> examples, std::size_t k);
Vector assemble_grad_x(TermCache& terms, std::size_t example, std::size_t slot);
Vector assemble_grad_lambda(TermCache& terms, std::size_t example, std::size_t node);

/// All partials. Per-example entries outside `examples` are left empty.
struct Gradient {
  std::vector<Matrix> w;
  std::vector<Matrix> u;
  std::vector<std::vector<Vector>> x;       // [example][slot]
  std::vector<std::vector<Vector>> lambda;  // [example][node]
};

Gradient full_gradient(const Problem& problem, const StateStore& states, const WeightStore& weights,
                       const Dataset& data, std::span<const std::size_t> examples);
Gradient full_gradient(TermCache& terms, std::span<const std::size_t> examples);

/// Lagrangian and constraint statistics over the given examples.
struct LagrangianSummary {
  double lagrangian = 0.0;
  double loss_term = 0.0;
  double max_abs_residual = 0.0;
  double mean_abs_residual = 0.0;
  double lambda_l1 = 0.0;
};

LagrangianSummary summarize(TermCache& terms, std::span<const std::size_t> examples);

/// Signed region of every non-differentiable quantity (G argument vs +/-eps,
/// ReLU pre-activation vs 0, x vs 0 when alpha > 0), in a fixed order. Two
/// points with equal signatures lie on the same smooth piece.
std::vector<int> kink_signature(const Problem& problem, const StateStore& states, const WeightStore& weights,
                                const Dataset& data);

/// 0, 1, ..., n-1.
std::vector<std::size_t> all_examples(std::size_t n);

}  // namespace lp
