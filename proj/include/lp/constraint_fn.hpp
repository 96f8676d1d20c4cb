#pragma once

#include <string>
#include <string_view>

namespace lp {

/// The G function wrapped around every architectural constraint residual.
///
/// Identity enforces equality exactly. The two epsilon-insensitive variants
/// vanish on [-epsilon, epsilon] and are linear outside it: EpsAbs is
/// max(|a| - eps, 0) and never negative, EpsLin is max(a, eps) - max(-a, eps)
/// and keeps the sign of a.
class ConstraintKind {
 public:
  enum class Kind { Identity, EpsAbs, EpsLin };

  constexpr ConstraintKind() = default;
  ConstraintKind(Kind kind, double epsilon = 0.0);

  static ConstraintKind identity() { return {}; }
  static ConstraintKind eps_abs(double epsilon) { return {Kind::EpsAbs, epsilon}; }
  static ConstraintKind eps_lin(double epsilon) { return {Kind::EpsLin, epsilon}; }

  /// Parses "identity", "eps_abs" or "eps_lin".
  static ConstraintKind parse(std::string_view name, double epsilon);

  Kind kind() const noexcept { return kind_; }
  double epsilon() const noexcept { return epsilon_; }
  std::string name() const;

  double value(double a) const noexcept;

  /// Dead-zone subgradient: 0 for |a| <= epsilon, including the kinks themselves.
  double derivative(double a) const noexcept;

  /// Distance from a to the nearest non-differentiable point (infinite for Identity).
  double kink_distance(double a) const noexcept;

 private:
  Kind kind_ = Kind::Identity;
  double epsilon_ = 0.0;
};

}  // namespace lp
