#pragma once

// Independent correctness oracles for the LP gradients.
//
// backprop() is a plain forward pass plus delta recursion written without
// any lp_core code. finite_diff() is a generic central-difference estimator.
// recover_backprop() rebuilds the stationary point of the Lagrangian in
// (X, Lambda) for given weights and compares LP's weight gradient there with
// backprop.
//
// Sign convention: with identity G the stationary multipliers are
// lambda_l = -dV/dx_l, so the LP quantity lambda_l . sigma'(a_l) is the
// negative of the classic delta. Comparisons are made on weight gradients,
// which do not depend on the convention.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lp/data.hpp"
#include "lp/lagrangian.hpp"
#include "lp/linalg.hpp"
#include "lp/network.hpp"
#include "lp/stores.hpp"

namespace lp::oracles {

/// delta[l][i] = dV_i/da_l for hidden layers l = 1..H, and delta[H+1][i] = V'.
/// delta[0] is empty.
struct DeltaStack {
  std::vector<std::vector<Vector>> delta;
};

struct BackpropResult {
  std::vector<Matrix> grads;                    // dV/dW_l, l = 0..H
  std::vector<std::vector<Vector>> activations; // [l][i], l = 0..H
  DeltaStack deltas;
  double loss = 0.0;
};

/// MLP only. Throws ConfigError for other architectures.
BackpropResult backprop(const WeightStore& weights, const NetworkSpec& spec, const Dataset& data);
std::vector<Matrix> backprop_grad(const WeightStore& weights, const NetworkSpec& spec, const Dataset& data);

/// Sum of V over examples via a plain forward pass (the function backprop differentiates).
double network_loss(const WeightStore& weights, const NetworkSpec& spec, const Dataset& data);

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central differences (f(t + h e_k) - f(t - h e_k)) / 2h for every k.
/// Throws DivergenceError if any evaluation is non-finite.
Vector finite_diff(const ScalarFunction& f, std::span<const double> theta, double h = 1e-5);
double finite_diff_coordinate(const ScalarFunction& f, std::span<const double> theta, std::size_t k, double h);

struct RecoveryReport {
  /// max over layers of max|LP - BP| / max|BP| (0 when both vanish).
  double discrepancy = 0.0;
  /// Largest |dL/dx| and |dL/dlambda| at the reconstructed point (stationarity check).
  double max_state_gradient = 0.0;
  double max_residual = 0.0;
  std::vector<std::vector<Vector>> lambda;  // [i][l-1]
  std::vector<Matrix> lp_grads;
  std::vector<Matrix> bp_grads;
};

/// Identity G, MLP. Projects X to the forward pass, solves Lambda top-down
/// from dL/dx = 0, then compares LP's dL/dW with backprop.
RecoveryReport recover_backprop(const WeightStore& weights, const NetworkSpec& spec, const Dataset& data);
double recover_backprop_check(const WeightStore& weights, const NetworkSpec& spec, const Dataset& data);

/// Flat view over every optimization variable: W, then U, then per example
/// x slots and lambda nodes.
Vector pack(const StateStore& states, const WeightStore& weights);
void unpack(std::span<const double> theta, StateStore& states, WeightStore& weights);
Vector pack(const Gradient& grad);
/// Describes coordinate k of the flat view, e.g. "W[1](0,2)".
std::string coordinate_name(const Problem& problem, const StateStore& states, const WeightStore& weights,
                            std::size_t k);

struct GradCheckOptions {
  double h = 1e-5;
  double h_confirm = 1e-6;
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
  /// Below this magnitude the absolute tolerance applies.
  double small = 1e-3;
  double kink_margin = 1e-4;
  /// Test hook: tampers with the analytic gradient before comparison.
  std::function<void(Gradient&)> corrupt;
};

struct GradCheckReport {
  std::size_t checked = 0;
  std::size_t excluded = 0;
  std::size_t failures = 0;
  double max_rel_error = 0.0;    // over coordinates judged relatively
  double max_abs_error = 0.0;    // over coordinates judged absolutely
  std::string worst;
  bool passed() const noexcept { return failures == 0; }
};

/// Compares every analytic partial of the Lagrangian against central finite
/// differences at the given point. Coordinates along which any kink lies
/// within kink_margin are excluded.
GradCheckReport check_lp_gradients(const Problem& problem, const StateStore& states, const WeightStore& weights,
                                   const Dataset& data, const GradCheckOptions& options = {});

}  // namespace lp::oracles
