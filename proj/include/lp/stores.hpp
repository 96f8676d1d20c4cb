#pragma once

// Optimization variables of the LP problem: per-example neuron states x and
// multipliers lambda, and the shared weights W (and recurrent U).
//
// Element access goes through traced accessors so tests can observe exactly
// which layers a computation touches.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lp/graph.hpp"
#include "lp/linalg.hpp"
#include "lp/trace.hpp"

namespace lp {

class StateStore {
 public:
  StateStore() = default;
  /// All states and multipliers zero, for `examples` examples.
  StateStore(const ConstraintGraph& graph, std::size_t examples);

  std::size_t examples() const noexcept { return x_.size(); }
  std::size_t variables() const noexcept { return var_tags_.size(); }
  std::size_t nodes() const noexcept { return node_tags_.size(); }

  const Vector& x(std::size_t example, std::size_t slot) const {
    const auto& tag = var_tags_[slot];
    trace::record(trace::Access::ReadState, example, tag.layer, tag.time);
    return x_[example][slot];
  }
  Vector& x_mut(std::size_t example, std::size_t slot) {
    const auto& tag = var_tags_[slot];
    trace::record(trace::Access::WriteState, example, tag.layer, tag.time);
    return x_[example][slot];
  }
  const Vector& lambda(std::size_t example, std::size_t node) const {
    const auto& tag = node_tags_[node];
    trace::record(trace::Access::ReadMultiplier, example, tag.layer, tag.time);
    return lambda_[example][node];
  }
  Vector& lambda_mut(std::size_t example, std::size_t node) {
    const auto& tag = node_tags_[node];
    trace::record(trace::Access::WriteMultiplier, example, tag.layer, tag.time);
    return lambda_[example][node];
  }

  bool operator==(const StateStore& other) const { return x_ == other.x_ && lambda_ == other.lambda_; }

 private:
  struct Tag {
    int layer;
    int time;
    bool operator==(const Tag&) const = default;
  };
  std::vector<Tag> var_tags_;
  std::vector<Tag> node_tags_;
  std::vector<std::vector<Vector>> x_;
  std::vector<std::vector<Vector>> lambda_;
};

class WeightStore {
 public:
  WeightStore() = default;

  /// Zero weights with the shapes implied by `spec`.
  static WeightStore zeros(const NetworkSpec& spec);
  /// Uniform in (-1/sqrt(fan_in), 1/sqrt(fan_in)), drawn W_0..W_H then U_0..U_{H-1}.
  static WeightStore random(const NetworkSpec& spec, std::uint64_t seed);

  std::size_t weight_count() const noexcept { return w_.size(); }
  std::size_t recurrent_count() const noexcept { return u_.size(); }

  const Matrix& w(std::size_t k) const {
    trace::record(trace::Access::ReadWeight, 0, static_cast<int>(k), 0);
    return w_.at(k);
  }
  Matrix& w_mut(std::size_t k) {
    trace::record(trace::Access::WriteWeight, 0, static_cast<int>(k), 0);
    return w_.at(k);
  }
  const Matrix& u(std::size_t k) const {
    trace::record(trace::Access::ReadRecurrentWeight, 0, static_cast<int>(k), 0);
    return u_.at(k);
  }
  Matrix& u_mut(std::size_t k) {
    trace::record(trace::Access::WriteRecurrentWeight, 0, static_cast<int>(k), 0);
    return u_.at(k);
  }

  /// Total scalar parameter count |W| (+|U|).
  std::size_t parameter_count() const noexcept;

  /// Throws DimensionError if shapes disagree with `spec`.
  void check_shapes(const NetworkSpec& spec) const;

  bool operator==(const WeightStore&) const = default;

 private:
  std::vector<Matrix> w_;
  std::vector<Matrix> u_;
};

}  // namespace lp
