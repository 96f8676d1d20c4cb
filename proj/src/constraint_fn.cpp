#include "lp/constraint_fn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lp/error.hpp"

namespace lp {

ConstraintKind::ConstraintKind(Kind kind, double epsilon) : kind_(kind), epsilon_(epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("constraint.epsilon", "must be a finite non-negative number");
  }
}

ConstraintKind ConstraintKind::parse(std::string_view name, double epsilon) {
  if (name == "identity") return {Kind::Identity, epsilon};
  if (name == "eps_abs") return {Kind::EpsAbs, epsilon};
  if (name == "eps_lin") return {Kind::EpsLin, epsilon};
  throw ConfigError("constraint.kind", "unknown constraint kind '" + std::string(name) + "'");
}

std::string ConstraintKind::name() const {
  switch (kind_) {
    case Kind::Identity: return "identity";
    case Kind::EpsAbs: return "eps_abs";
    case Kind::EpsLin: return "eps_lin";
  }
  return "unknown";
}

double ConstraintKind::value(double a) const noexcept {
  switch (kind_) {
    case Kind::Identity: return a;
    case Kind::EpsAbs: return std::max(std::abs(a) - epsilon_, 0.0);
    case Kind::EpsLin: return std::max(a, epsilon_) - std::max(-a, epsilon_);
  }
  return a;
}

double ConstraintKind::derivative(double a) const noexcept {
  switch (kind_) {
    case Kind::Identity: return 1.0;
    case Kind::EpsAbs:
      if (a > epsilon_) return 1.0;
      if (a < -epsilon_) return -1.0;
      return 0.0;
    case Kind::EpsLin: return std::abs(a) > epsilon_ ? 1.0 : 0.0;
  }
  return 1.0;
}

double ConstraintKind::kink_distance(double a) const noexcept {
  if (kind_ == Kind::Identity) return std::numeric_limits<double>::infinity();
  return std::min(std::abs(a - epsilon_), std::abs(a + epsilon_));
}

}  // namespace lp
