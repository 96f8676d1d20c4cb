#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lp/constraint_fn.hpp"
#include "lp/error.hpp"
#include "lp/functions.hpp"
#include "lp/rng.hpp"

using namespace lp;

TEST_CASE("G values") {
  const auto abs = ConstraintKind::eps_abs(0.2);
  const auto lin = ConstraintKind::eps_lin(0.2);
  CHECK(abs.value(0.5) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(abs.value(-0.1) == 0.0);
  CHECK(lin.value(-0.5) == doctest::Approx(-0.3).epsilon(1e-15));
  CHECK(lin.value(0.1) == 0.0);
  for (double a : {-3.5, 0.0, 1e-300, 42.0}) CHECK(ConstraintKind::identity().value(a) == a);
}

TEST_CASE("G derivatives") {
  const auto abs = ConstraintKind::eps_abs(0.2);
  const auto lin = ConstraintKind::eps_lin(0.2);
  CHECK(abs.derivative(0.5) == 1.0);
  CHECK(abs.derivative(-0.5) == -1.0);
  CHECK(lin.derivative(0.0) == 0.0);
  CHECK(lin.derivative(-0.7) == 1.0);
  CHECK(ConstraintKind::identity().derivative(123.0) == 1.0);
  // kinks take the dead-zone value
  CHECK(abs.derivative(0.2) == 0.0);
  CHECK(lin.derivative(-0.2) == 0.0);
}

TEST_CASE("parse and validation") {
  CHECK(ConstraintKind::parse("eps_abs", 0.1).kind() == ConstraintKind::Kind::EpsAbs);
  CHECK(ConstraintKind::parse("eps_lin", 0.1).epsilon() == 0.1);
  CHECK(ConstraintKind::parse("identity", 0.0).kind() == ConstraintKind::Kind::Identity);
  CHECK_THROWS_AS(ConstraintKind::parse("hinge", 0.1), ConfigError);
  CHECK_THROWS_AS(ConstraintKind::eps_abs(-1.0), ConfigError);
}

TEST_CASE("property: dead zone, sign and symmetry over random arguments") {
  Rng rng(11);
  for (int k = 0; k < 2000; ++k) {
    const double eps = rng.uniform(0.0, 1.0);
    const double a = rng.uniform(-3.0, 3.0);
    const auto abs = ConstraintKind::eps_abs(eps);
    const auto lin = ConstraintKind::eps_lin(eps);
    CHECK(abs.value(a) >= 0.0);
    CHECK(lin.value(-a) == -lin.value(a));
    CHECK(abs.value(-a) == abs.value(a));
    if (std::abs(a) <= eps) {
      CHECK(abs.value(a) == 0.0);
      CHECK(lin.value(a) == 0.0);
      CHECK(abs.derivative(a) == 0.0);
      CHECK(lin.derivative(a) == 0.0);
    } else {
      CHECK(std::abs(lin.value(a)) == doctest::Approx(std::abs(a) - eps));
    }
  }
}

TEST_CASE("property: derivatives match central differences away from kinks") {
  Rng rng(12);
  const double h = 1e-6;
  for (int k = 0; k < 500; ++k) {
    const double eps = rng.uniform(0.0, 0.5);
    const double a = rng.uniform(-2.0, 2.0);
    for (auto g : {ConstraintKind::identity(), ConstraintKind::eps_abs(eps), ConstraintKind::eps_lin(eps)}) {
      if (g.kink_distance(a) < 1e-4) continue;
      const double fd = (g.value(a + h) - g.value(a - h)) / (2 * h);
      CHECK(g.derivative(a) == doctest::Approx(fd).epsilon(1e-7));
    }
    for (auto act : {ActivationKind::Tanh, ActivationKind::Sigmoid, ActivationKind::ReLU}) {
      if (activation_kink_distance(act, a) < 1e-4) continue;
      const double fd = (activate(act, a + h) - activate(act, a - h)) / (2 * h);
      CHECK(activate_derivative(act, a) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("activations") {
  CHECK(activate(ActivationKind::Tanh, 0.0) == 0.0);
  CHECK(activate_derivative(ActivationKind::Tanh, 0.0) == 1.0);
  CHECK(activate(ActivationKind::Sigmoid, 0.0) == 0.5);
  CHECK(activate(ActivationKind::ReLU, -2.0) == 0.0);
  CHECK(activate_derivative(ActivationKind::ReLU, 0.0) == 0.0);
  CHECK(parse_activation("relu") == ActivationKind::ReLU);
  CHECK_THROWS_AS(parse_activation("gelu"), ConfigError);
}

TEST_CASE("losses") {
  const Vector y{7};
  CHECK(loss_value(LossKind::SquaredError, Vector{7}, y) == 0.0);
  CHECK(loss_grad(LossKind::SquaredError, Vector{7}, y) == Vector{0});
  CHECK(loss_value(LossKind::SquaredError, Vector{6}, y) == 0.5);
  CHECK(loss_grad(LossKind::SquaredError, Vector{6}, y) == Vector{-1});

  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    Vector o(4);
    for (double& v : o) v = rng.uniform(-5, 5);
    Vector onehot(4, 0.0);
    onehot[rng.below(4)] = 1.0;
    const auto g = loss_grad(LossKind::SoftmaxCrossEntropy, o, onehot);
    double sum = 0;
    for (double v : g) sum += v;
    CHECK(std::abs(sum) < 1e-15);
    CHECK(loss_value(LossKind::SoftmaxCrossEntropy, o, onehot) > 0.0);
  }
  CHECK(parse_loss("mse") == LossKind::SquaredError);
  CHECK(parse_loss("cross_entropy") == LossKind::SoftmaxCrossEntropy);
}
