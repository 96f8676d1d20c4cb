#pragma once

#include <vector>

#include "lp/graph.hpp"
#include "lp/linalg.hpp"
#include "lp/network.hpp"

namespace lp {

/// Compiles a network description into its constraint graph.
///
///  - mlp:          H feedforward nodes, x_l = sigma(W_{l-1} x_{l-1}).
///  - rnn:          H*T recurrent nodes sharing W_{l-1}, U_{l-1} over time;
///                  x_l^0 is the zero vector. Variable slots are layer-major.
///  - resnet:       H identity-skip nodes, x_l = x_{l-1} + sigma(W_{l-1} x_{l-1}).
///  - resnet_tilde: H nodes over x~_l = x_l - x_{l-1}, where node l reads
///                  sum_{j<l} x~_j and the loss reads W_H sum_{j<=H} x~_j
///                  (x~_0 = x_0 is the constant input).
ConstraintGraph build_graph(const NetworkSpec& spec);

/// Per-layer states (x_0, x_1, ..., x_H) -> (x~_0, ..., x~_H), x~_0 = x_0.
std::vector<Vector> tilde_map(const std::vector<Vector>& layers);

/// Inverse of tilde_map: prefix sums.
std::vector<Vector> tilde_unmap(const std::vector<Vector>& tilde);

}  // namespace lp
