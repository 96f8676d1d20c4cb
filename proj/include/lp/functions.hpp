#pragma once

// Neuron activations and supervision losses (sigma and V, with derivatives).

#include <span>
#include <string>
#include <string_view>

#include "lp/linalg.hpp"

namespace lp {

enum class ActivationKind { Tanh, Sigmoid, ReLU };

ActivationKind parse_activation(std::string_view name);
std::string to_string(ActivationKind kind);

double activate(ActivationKind kind, double a) noexcept;
/// sigma'(a); ReLU'(0) is 0.
double activate_derivative(ActivationKind kind, double a) noexcept;
/// Distance to the nearest point where sigma is not differentiable.
double activation_kink_distance(ActivationKind kind, double a) noexcept;

Vector activate(ActivationKind kind, std::span<const double> a);
Vector activate_derivative(ActivationKind kind, std::span<const double> a);

enum class LossKind { SquaredError, SoftmaxCrossEntropy };

LossKind parse_loss(std::string_view name);
std::string to_string(LossKind kind);

/// V(o, y): 0.5*||o - y||^2 or -sum y log softmax(o).
double loss_value(LossKind kind, std::span<const double> output, std::span<const double> target);
/// dV/do: o - y or softmax(o) - y.
Vector loss_grad(LossKind kind, std::span<const double> output, std::span<const double> target);

}  // namespace lp
