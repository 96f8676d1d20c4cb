#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lp/error.hpp"
#include "lp/oracles.hpp"
#include "reference_values.hpp"
#include "support.hpp"

using namespace lp;
using namespace lp::testing;

namespace {

double max_abs(const Matrix& m) {
  double out = 0;
  for (double v : m.data()) out = std::max(out, std::abs(v));
  return out;
}

struct Chain {
  NetworkSpec spec = mlp_spec({1, 1, 1}, 1);
  WeightStore weights = WeightStore::zeros(spec);
  Dataset data;
  Chain() {
    weights.w_mut(0) = Matrix{{0.5}};
    weights.w_mut(1) = Matrix{{-1.5}};
    weights.w_mut(2) = Matrix{{2.0}};
    data.inputs = {{{1.0}}};
    data.targets = {{1.0}};
  }
};

}  // namespace

TEST_CASE("finite differences of simple functions") {
  const oracles::ScalarFunction half_sq = [](std::span<const double> t) { return 0.5 * t[0] * t[0]; };
  const Vector theta{3.0};
  CHECK(std::abs(oracles::finite_diff(half_sq, theta)[0] - 3.0) < 1e-9);

  const oracles::ScalarFunction linear = [](std::span<const double> t) { return 2.5 * t[0] - 0.75 * t[1]; };
  for (double h : {1e-2, 1e-4, 1e-6}) {
    const auto g = oracles::finite_diff(linear, Vector{0.5, -4.0}, h);
    CHECK(g[0] == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(g[1] == doctest::Approx(-0.75).epsilon(1e-9));
  }
}

TEST_CASE("backprop on a one-dimensional chain") {
  Chain c;
  const auto bp = oracles::backprop(c.weights, c.spec, c.data);
  CHECK(bp.loss == doctest::Approx(ref::kChainLoss).epsilon(1e-14));
  CHECK(bp.grads[0](0, 0) == doctest::Approx(ref::kChainGradW0).epsilon(1e-14));
  CHECK(bp.grads[1](0, 0) == doctest::Approx(ref::kChainGradW1).epsilon(1e-14));
  CHECK(bp.grads[2](0, 0) == doctest::Approx(ref::kChainGradW2).epsilon(1e-14));
}

TEST_CASE("recovered multipliers on a one-dimensional chain") {
  Chain c;
  const auto r = oracles::recover_backprop(c.weights, c.spec, c.data);
  CHECK(r.lambda[0][0][0] == doctest::Approx(ref::kChainLambda1).epsilon(1e-14));
  CHECK(r.lambda[0][1][0] == doctest::Approx(ref::kChainLambda2).epsilon(1e-14));
  CHECK(r.discrepancy <= 1e-10);
  CHECK(r.max_residual == 0.0);
}

TEST_CASE("zero weights give zero backprop gradients") {
  const auto spec = mlp_spec({3, 4, 4, 2}, 2);
  Rng rng(1);
  const auto data = random_dataset(spec, 5, rng);
  const auto bp = oracles::backprop_grad(WeightStore::zeros(spec), spec, data);
  for (const auto& g : bp) CHECK(max_abs(g) == 0.0);
  CHECK(oracles::recover_backprop_check(WeightStore::zeros(spec), spec, data) == 0.0);
}

TEST_CASE("backprop matches finite differences of the network loss") {
  Rng rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    NetworkSpec spec = random_spec(Arch::Mlp, rng);
    if (spec.activation == ActivationKind::ReLU) spec.activation = ActivationKind::Sigmoid;
    const auto data = random_dataset(spec, 3, rng);
    WeightStore w = WeightStore::random(spec, rep);
    const auto grads = oracles::backprop_grad(w, spec, data);
    for (std::size_t k = 0; k < w.weight_count(); ++k) {
      Matrix m = w.w(k);
      const oracles::ScalarFunction f = [&](std::span<const double> t) {
        std::copy(t.begin(), t.end(), w.w_mut(k).data().begin());
        return oracles::network_loss(w, spec, data);
      };
      const Vector theta(m.data().begin(), m.data().end());
      const auto fd = oracles::finite_diff(f, theta, 1e-5);
      w.w_mut(k) = m;
      const double scale = std::max(1.0, max_abs(grads[k]));
      for (std::size_t j = 0; j < fd.size(); ++j) CHECK(std::abs(fd[j] - grads[k].data()[j]) <= 1e-7 * scale);
    }
  }
}

TEST_CASE("backprop recovery on random networks") {
  const auto spec = mlp_spec({3, 4, 4, 2}, 2);
  Rng rng(3);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = random_dataset(spec, 4, rng);
    const auto r = oracles::recover_backprop(WeightStore::random(spec, seed), spec, data);
    CHECK(r.discrepancy <= 1e-10);
    CHECK(r.max_state_gradient <= 1e-12);
  }
  NetworkSpec rnn = spec;
  rnn.arch = Arch::Rnn;
  CHECK_THROWS_AS(oracles::backprop_grad(WeightStore::random(rnn, 0), rnn, random_dataset(rnn, 1, rng)), ConfigError);
}

TEST_CASE("pack and unpack are inverse") {
  NetworkSpec spec = mlp_spec({2, 3}, 1);
  spec.arch = Arch::Rnn;
  spec.seq_len = 2;
  auto inst = make_instance(spec, ConstraintKind::identity(), {}, 2, 5);
  const Vector theta = oracles::pack(inst->states, inst->weights);
  StateStore s(inst->problem.graph, 2);
  WeightStore w = WeightStore::zeros(spec);
  oracles::unpack(theta, s, w);
  CHECK(s == inst->states);
  CHECK(w == inst->weights);
  CHECK(oracles::coordinate_name(inst->problem, s, w, 0).find("W") != std::string::npos);
}

TEST_CASE("gradient check catches a corrupted partial") {
  auto inst = make_instance(mlp_spec({3, 4, 2}, 2), ConstraintKind::identity(), RegConfig{0.1, 0.01}, 2, 6);
  oracles::GradCheckOptions o;
  CHECK(oracles::check_lp_gradients(inst->problem, inst->states, inst->weights, inst->data, o).passed());
  o.corrupt = [](Gradient& g) { g.w[0](0, 0) += 1e-4; };
  const auto report = oracles::check_lp_gradients(inst->problem, inst->states, inst->weights, inst->data, o);
  CHECK(report.failures == 1);
  CHECK(report.worst.find("W[0]") != std::string::npos);
}

TEST_CASE("coordinates next to a kink are excluded") {
  auto inst = make_instance(mlp_spec({2, 3}, 1), ConstraintKind::eps_abs(0.1), {}, 1, 7);
  auto& I = *inst;
  // put one argument exactly on the kink
  TermCache terms(I.problem, I.states, I.weights, I.data);
  const double base = I.states.x(0, 0)[0] - terms.node(0, 0).argument[0];
  I.states.x_mut(0, 0)[0] = base + 0.1;
  const auto report = oracles::check_lp_gradients(I.problem, I.states, I.weights, I.data);
  CHECK(report.excluded > 0);
  CHECK(report.passed());
}
