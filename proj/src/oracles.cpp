#include "lp/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lp/architectures.hpp"
#include "lp/error.hpp"

namespace lp::oracles {

namespace {

// Local copies of sigma, sigma' and V' keep the oracle independent of lp_core.
double sigma(ActivationKind kind, double a) {
  switch (kind) {
    case ActivationKind::Tanh: return std::tanh(a);
    case ActivationKind::Sigmoid: return 1.0 / (1.0 + std::exp(-a));
    case ActivationKind::ReLU: return std::max(a, 0.0);
  }
  return a;
}

double sigma_prime(ActivationKind kind, double a) {
  switch (kind) {
    case ActivationKind::Tanh: return 1.0 / (std::cosh(a) * std::cosh(a));
    case ActivationKind::Sigmoid: {
      const double e = std::exp(-std::abs(a));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case ActivationKind::ReLU: return a > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

struct LossEval {
  double value = 0.0;
  Vector grad;
};

LossEval eval_loss(LossKind kind, const Vector& o, const Vector& y) {
  if (o.size() != y.size()) throw DimensionError("oracle: output/target width mismatch");
  LossEval e;
  e.grad.resize(o.size());
  if (kind == LossKind::SquaredError) {
    for (std::size_t k = 0; k < o.size(); ++k) {
      e.grad[k] = o[k] - y[k];
      e.value += 0.5 * e.grad[k] * e.grad[k];
    }
    return e;
  }
  const double m = *std::max_element(o.begin(), o.end());
  double z = 0.0;
  for (double v : o) z += std::exp(v - m);
  double mass = 0.0;
  for (double v : y) mass += v;
  for (std::size_t k = 0; k < o.size(); ++k) {
    const double p = std::exp(o[k] - m) / z;
    e.grad[k] = mass * p - y[k];
    e.value -= y[k] * std::log(p);
  }
  return e;
}

// a = W [x; 1?]
Vector affine(const Matrix& w, const Vector& x, bool bias) {
  if (w.cols() != x.size() + (bias ? 1 : 0)) throw DimensionError("oracle: weight/activation width mismatch");
  Vector a(w.rows(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    double s = bias ? w(r, x.size()) : 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) s += w(r, c) * x[c];
    a[r] = s;
  }
  return a;
}

void require_mlp(const NetworkSpec& spec) {
  spec.validate();
  if (spec.arch != Arch::Mlp) throw ConfigError("network.arch", "backprop oracle supports mlp only");
}

}  // namespace

BackpropResult backprop(const WeightStore& weights, const NetworkSpec& spec, const Dataset& data) {
  require_mlp(spec);
  weights.check_shapes(spec);
  const std::size_t h = spec.hidden_layers();
  const bool bias = spec.bias;

  BackpropResult res;
  res.activations.assign(h + 1, {});
  res.deltas.delta.assign(h + 2, {});
  for (std::size_t l = 0; l <= h; ++l) res.grads.emplace_back(weights.w(l).rows(), weights.w(l).cols());

  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<Vector> x{data.inputs[i].at(0)};
    std::vector<Vector> pre{{}};
    for (std::size_t l = 1; l <= h; ++l) {
      Vector a = affine(weights.w(l - 1), x.back(), bias);
      Vector out(a.size());
      for (std::size_t k = 0; k < a.size(); ++k) out[k] = sigma(spec.activation, a[k]);
      pre.push_back(std::move(a));
      x.push_back(std::move(out));
    }
    const Vector o = affine(weights.w(h), x[h], bias);
    const LossEval loss = eval_loss(spec.loss, o, data.targets[i]);
    res.loss += loss.value;

    // delta_{H+1} = V'; delta_l = sigma'(a_l) . (W_l^T delta_{l+1})
    std::vector<Vector> delta(h + 2);
    delta[h + 1] = loss.grad;
    for (std::size_t l = h; l >= 1; --l) {
      const Matrix& w = weights.w(l);
      Vector d(x[l].size(), 0.0);
      for (std::size_t c = 0; c < d.size(); ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < w.rows(); ++r) s += w(r, c) * delta[l + 1][r];
        d[c] = sigma_prime(spec.activation, pre[l][c]) * s;
      }
      delta[l] = std::move(d);
    }
    // dV/dW_l = delta_{l+1} [x_l; 1]^T
    for (std::size_t l = 0; l <= h; ++l) {
      Matrix& g = res.grads[l];
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < x[l].size(); ++c) g(r, c) += delta[l + 1][r] * x[l][c];
        if (bias) g(r, x[l].size()) += delta[l + 1][r];
      }
    }
    for (std::size_t l = 0; l <= h; ++l) res.activations[l].push_back(x[l]);
    for (std::size_t l = 1; l <= h + 1; ++l) res.deltas.delta[l].push_back(delta[l]);
  }
  return res;
}

std::vector<Matrix> backprop_grad(const WeightStore& weights, const NetworkSpec& spec, const Dataset& data) {
  return backprop(weights, spec, data).grads;
}

double network_loss(const WeightStore& weights, const NetworkSpec& spec, const Dataset& data) {
  return backprop(weights, spec, data).loss;
}

double finite_diff_coordinate(const ScalarFunction& f, std::span<const double> theta, std::size_t k, double h) {
  Vector probe(theta.begin(), theta.end());
  probe[k] = theta[k] + h;
  const double up = f(probe);
  probe[k] = theta[k] - h;
  const double down = f(probe);
  if (!std::isfinite(up) || !std::isfinite(down)) {
    throw DivergenceError("finite difference coordinate " + std::to_string(k), -1);
  }
  return (up - down) / (2.0 * h);
}

Vector finite_diff(const ScalarFunction& f, std::span<const double> theta, double h) {
  Vector g(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) g[k] = finite_diff_coordinate(f, theta, k, h);
  return g;
}

RecoveryReport recover_backprop(const WeightStore& weights, const NetworkSpec& spec, const Dataset& data) {
  require_mlp(spec);
  const BackpropResult bp = backprop(weights, spec, data);
  const std::size_t h = spec.hidden_layers();
  const bool bias = spec.bias;

  Problem problem{build_graph(spec), ConstraintKind::identity(), RegConfig{}};
  StateStore states(problem.graph, data.size());
  RecoveryReport report;
  report.lambda.resize(data.size());

  for (std::size_t i = 0; i < data.size(); ++i) {
    // dL/dlambda = 0: states are the forward activations
    for (std::size_t l = 1; l <= h; ++l) states.x_mut(i, l - 1) = bp.activations[l][i];

    // dL/dx_H = 0:  lambda_H = -W_H^T V'
    // dL/dx_l = 0:  lambda_l = W_l^T (lambda_{l+1} . sigma'(W_l x_l))
    std::vector<Vector> lambda(h + 1);
    {
      const Matrix& w = weights.w(h);
      const Vector& vprime = bp.deltas.delta[h + 1][i];
      Vector lam(bp.activations[h][i].size(), 0.0);
      for (std::size_t c = 0; c < lam.size(); ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < w.rows(); ++r) s += w(r, c) * vprime[r];
        lam[c] = -s;
      }
      lambda[h] = std::move(lam);
    }
    for (std::size_t l = h - 1; l >= 1; --l) {
      const Matrix& w = weights.w(l);
      const Vector a = affine(w, bp.activations[l][i], bias);
      Vector lam(bp.activations[l][i].size(), 0.0);
      for (std::size_t c = 0; c < lam.size(); ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < w.rows(); ++r) s += w(r, c) * lambda[l + 1][r] * sigma_prime(spec.activation, a[r]);
        lam[c] = s;
      }
      lambda[l] = std::move(lam);
    }
    for (std::size_t l = 1; l <= h; ++l) {
      states.lambda_mut(i, l - 1) = lambda[l];
      report.lambda[i].push_back(lambda[l]);
    }
  }

  TermCache terms(problem, states, weights, data);
  const auto examples = all_examples(data.size());
  const Gradient lp = full_gradient(terms, examples);
  report.lp_grads = lp.w;
  report.bp_grads = bp.grads;

  for (std::size_t l = 0; l <= h; ++l) {
    double diff = 0.0;
    double scale = 0.0;
    const auto a = lp.w[l].data();
    const auto b = bp.grads[l].data();
    for (std::size_t k = 0; k < a.size(); ++k) {
      diff = std::max(diff, std::abs(a[k] - b[k]));
      scale = std::max(scale, std::abs(b[k]));
    }
    const double rel = scale > 0.0 ? diff / scale : diff;
    report.discrepancy = std::max(report.discrepancy, rel);
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (const auto& g : lp.x[i])
      for (double v : g) report.max_state_gradient = std::max(report.max_state_gradient, std::abs(v));
    for (const auto& g : lp.lambda[i])
      for (double v : g) report.max_residual = std::max(report.max_residual, std::abs(v));
  }
  return report;
}

double recover_backprop_check(const WeightStore& weights, const NetworkSpec& spec, const Dataset& data) {
  return recover_backprop(weights, spec, data).discrepancy;
}

Vector pack(const StateStore& states, const WeightStore& weights) {
  Vector theta;
  for (std::size_t k = 0; k < weights.weight_count(); ++k) {
    const auto d = weights.w(k).data();
    theta.insert(theta.end(), d.begin(), d.end());
  }
  for (std::size_t k = 0; k < weights.recurrent_count(); ++k) {
    const auto d = weights.u(k).data();
    theta.insert(theta.end(), d.begin(), d.end());
  }
  for (std::size_t i = 0; i < states.examples(); ++i) {
    for (std::size_t s = 0; s < states.variables(); ++s) {
      const auto& v = states.x(i, s);
      theta.insert(theta.end(), v.begin(), v.end());
    }
    for (std::size_t n = 0; n < states.nodes(); ++n) {
      const auto& v = states.lambda(i, n);
      theta.insert(theta.end(), v.begin(), v.end());
    }
  }
  return theta;
}

void unpack(std::span<const double> theta, StateStore& states, WeightStore& weights) {
  std::size_t pos = 0;
  auto take = [&](std::span<double> dst) {
    if (pos + dst.size() > theta.size()) throw DimensionError("unpack: flat vector too short");
    std::copy(theta.begin() + static_cast<std::ptrdiff_t>(pos),
              theta.begin() + static_cast<std::ptrdiff_t>(pos + dst.size()), dst.begin());
    pos += dst.size();
  };
  for (std::size_t k = 0; k < weights.weight_count(); ++k) take(weights.w_mut(k).data());
  for (std::size_t k = 0; k < weights.recurrent_count(); ++k) take(weights.u_mut(k).data());
  for (std::size_t i = 0; i < states.examples(); ++i) {
    for (std::size_t s = 0; s < states.variables(); ++s) take(states.x_mut(i, s));
    for (std::size_t n = 0; n < states.nodes(); ++n) take(states.lambda_mut(i, n));
  }
  if (pos != theta.size()) throw DimensionError("unpack: flat vector too long");
}

Vector pack(const Gradient& grad) {
  Vector theta;
  for (const auto& m : grad.w) theta.insert(theta.end(), m.data().begin(), m.data().end());
  for (const auto& m : grad.u) theta.insert(theta.end(), m.data().begin(), m.data().end());
  for (std::size_t i = 0; i < grad.x.size(); ++i) {
    for (const auto& v : grad.x[i]) theta.insert(theta.end(), v.begin(), v.end());
    for (const auto& v : grad.lambda[i]) theta.insert(theta.end(), v.begin(), v.end());
  }
  return theta;
}

std::string coordinate_name(const Problem& problem, const StateStore& states, const WeightStore& weights,
                            std::size_t k) {
  auto matrix_name = [](const char* tag, std::size_t idx, const Matrix& m, std::size_t off) {
    return std::string(tag) + "[" + std::to_string(idx) + "](" + std::to_string(off / m.cols()) + "," +
           std::to_string(off % m.cols()) + ")";
  };
  for (std::size_t l = 0; l < weights.weight_count(); ++l) {
    if (k < weights.w(l).size()) return matrix_name("W", l, weights.w(l), k);
    k -= weights.w(l).size();
  }
  for (std::size_t l = 0; l < weights.recurrent_count(); ++l) {
    if (k < weights.u(l).size()) return matrix_name("U", l, weights.u(l), k);
    k -= weights.u(l).size();
  }
  for (std::size_t i = 0; i < states.examples(); ++i) {
    for (std::size_t s = 0; s < states.variables(); ++s) {
      const auto w = states.x(i, s).size();
      if (k < w) return problem.graph.variable_name(s) + "(" + std::to_string(k) + ") example " + std::to_string(i);
      k -= w;
    }
    for (std::size_t n = 0; n < states.nodes(); ++n) {
      const auto w = states.lambda(i, n).size();
      if (k < w) {
        return "lambda" + problem.graph.variable_name(n).substr(1) + "(" + std::to_string(k) + ") example " +
               std::to_string(i);
      }
      k -= w;
    }
  }
  return "out of range";
}

GradCheckReport check_lp_gradients(const Problem& problem, const StateStore& states, const WeightStore& weights,
                                   const Dataset& data, const GradCheckOptions& options) {
  Gradient analytic = full_gradient(problem, states, weights, data, all_examples(data.size()));
  if (options.corrupt) options.corrupt(analytic);
  const Vector g = pack(analytic);
  const Vector theta = pack(states, weights);
  if (g.size() != theta.size()) throw DimensionError("gradient and parameter views differ in size");

  StateStore scratch_states = states;
  WeightStore scratch_weights = weights;
  const ScalarFunction value = [&](std::span<const double> t) {
    unpack(t, scratch_states, scratch_weights);
    return lagrangian_value(problem, scratch_states, scratch_weights, data);
  };
  auto signature_at = [&](std::span<const double> t) {
    unpack(t, scratch_states, scratch_weights);
    return kink_signature(problem, scratch_states, scratch_weights, data);
  };
  const std::vector<int> base = signature_at(theta);
  const bool has_kinks = !base.empty();

  struct Verdict {
    bool ok;
    double err;
    bool relative;
  };
  auto judge = [&](double a, double f) {
    const double mag = std::max(std::abs(a), std::abs(f));
    const double err = std::abs(a - f);
    if (mag < options.small) return Verdict{err <= options.abs_tol, err, false};
    return Verdict{err / mag <= options.rel_tol, err / mag, true};
  };

  GradCheckReport report;
  Vector probe = theta;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (has_kinks) {
      probe[k] = theta[k] + options.kink_margin;
      const bool up_same = signature_at(probe) == base;
      probe[k] = theta[k] - options.kink_margin;
      const bool down_same = signature_at(probe) == base;
      probe[k] = theta[k];
      if (!up_same || !down_same) {
        ++report.excluded;
        continue;
      }
    }
    ++report.checked;
    Verdict v = judge(g[k], finite_diff_coordinate(value, theta, k, options.h));
    if (!v.ok) {
      // a second step size guards against an unlucky truncation/cancellation balance
      const Verdict confirm = judge(g[k], finite_diff_coordinate(value, theta, k, options.h_confirm));
      if (confirm.ok || confirm.err < v.err) v = confirm;
    }
    double& worst = v.relative ? report.max_rel_error : report.max_abs_error;
    worst = std::max(worst, v.err);
    if (!v.ok) {
      if (report.failures == 0) report.worst = coordinate_name(problem, states, weights, k);
      ++report.failures;
    }
  }
  return report;
}

}  // namespace lp::oracles
