#include "lp/functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lp/error.hpp"

namespace lp {

ActivationKind parse_activation(std::string_view name) {
  if (name == "tanh") return ActivationKind::Tanh;
  if (name == "sigmoid") return ActivationKind::Sigmoid;
  if (name == "relu") return ActivationKind::ReLU;
  throw ConfigError("network.activation", "unknown activation '" + std::string(name) + "'");
}

std::string to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::ReLU: return "relu";
  }
  return "unknown";
}

double activate(ActivationKind kind, double a) noexcept {
  switch (kind) {
    case ActivationKind::Tanh: return std::tanh(a);
    case ActivationKind::Sigmoid: return 1.0 / (1.0 + std::exp(-a));
    case ActivationKind::ReLU: return a > 0.0 ? a : 0.0;
  }
  return a;
}

double activate_derivative(ActivationKind kind, double a) noexcept {
  switch (kind) {
    case ActivationKind::Tanh: {
      const double t = std::tanh(a);
      return 1.0 - t * t;
    }
    case ActivationKind::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-a));
      return s * (1.0 - s);
    }
    case ActivationKind::ReLU: return a > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

double activation_kink_distance(ActivationKind kind, double a) noexcept {
  if (kind == ActivationKind::ReLU) return std::abs(a);
  return std::numeric_limits<double>::infinity();
}

Vector activate(ActivationKind kind, std::span<const double> a) {
  Vector out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = activate(kind, a[k]);
  return out;
}

Vector activate_derivative(ActivationKind kind, std::span<const double> a) {
  Vector out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = activate_derivative(kind, a[k]);
  return out;
}

LossKind parse_loss(std::string_view name) {
  if (name == "squared_error" || name == "mse") return LossKind::SquaredError;
  if (name == "softmax_cross_entropy" || name == "cross_entropy") return LossKind::SoftmaxCrossEntropy;
  throw ConfigError("network.loss", "unknown loss '" + std::string(name) + "'");
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::SquaredError: return "squared_error";
    case LossKind::SoftmaxCrossEntropy: return "softmax_cross_entropy";
  }
  return "unknown";
}

namespace {

void check_lengths(std::span<const double> output, std::span<const double> target) {
  if (output.size() != target.size()) {
    throw DimensionError("loss: output width " + std::to_string(output.size()) + " vs target width " +
                         std::to_string(target.size()));
  }
}

// log-sum-exp with the max shifted out
double log_partition(std::span<const double> o) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : o) m = std::max(m, v);
  double s = 0.0;
  for (double v : o) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace

double loss_value(LossKind kind, std::span<const double> output, std::span<const double> target) {
  check_lengths(output, target);
  double acc = 0.0;
  switch (kind) {
    case LossKind::SquaredError:
      for (std::size_t k = 0; k < output.size(); ++k) {
        const double d = output[k] - target[k];
        acc += d * d;
      }
      return 0.5 * acc;
    case LossKind::SoftmaxCrossEntropy: {
      const double lz = log_partition(output);
      for (std::size_t k = 0; k < output.size(); ++k) acc -= target[k] * (output[k] - lz);
      return acc;
    }
  }
  return acc;
}

Vector loss_grad(LossKind kind, std::span<const double> output, std::span<const double> target) {
  check_lengths(output, target);
  Vector g(output.size());
  switch (kind) {
    case LossKind::SquaredError:
      for (std::size_t k = 0; k < output.size(); ++k) g[k] = output[k] - target[k];
      break;
    case LossKind::SoftmaxCrossEntropy: {
      const double lz = log_partition(output);
      double mass = 0.0;
      for (double y : target) mass += y;
      // d/do of -sum y (o - lz) is mass * softmax(o) - y; mass is 1 for distributions.
      for (std::size_t k = 0; k < output.size(); ++k) g[k] = mass * std::exp(output[k] - lz) - target[k];
      break;
    }
  }
  return g;
}

}  // namespace lp
