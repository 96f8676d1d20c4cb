// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "lp/architectures.hpp"
#include "lp/oracles.hpp"
#include "lp/parallel.hpp"
#include "support.hpp"

using namespace lp;
using namespace lp::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// Runs `seeds` trainings; a run succeeds if the final stores reach the
// accuracy and residual targets. Failed runs count as max_iters + 1.
Outcome seeded_training(const Problem& p, const Dataset& d, TrainConfig c, double min_acc, double max_res,
                        int seeds, double time_budget) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> iters;
  std::string per_seed;
  for (int s = 0; s < seeds; ++s) {
    c.seed = static_cast<std::uint64_t>(s);
    const auto run = train(p, d, c);
    const double acc = run.final.train_accuracy.value_or(0.0);
    const bool ok = acc >= min_acc && run.final.max_abs_residual < max_res;
    iters.push_back(ok ? static_cast<double>(run.iterations) : static_cast<double>(c.max_iters + 1));
    per_seed += " s" + std::to_string(s) + "=" + (ok ? std::to_string(run.iterations) : std::string("miss")) +
                fmt("(acc %.3f", acc) + fmt(" res %.1e)", run.final.max_abs_residual);
  }
  const double secs = seconds_since(t0);
  const double med = median(iters);
  Outcome o;
  o.pass = med <= static_cast<double>(c.max_iters) && secs < time_budget;
  o.detail = fmt("median iterations %.0f", med) + fmt(", %.1f s;", secs) + per_seed;
  return o;
}

Outcome xor_trainability() {
  const Problem p{build_graph(mlp_spec({2, 8}, 1)), ConstraintKind::identity(), RegConfig{0.5, 0.0}};
  TrainConfig c;
  c.eta_w = 0.05;
  c.eta_x = 0.1;
  c.eta_lambda = 0.1;
  c.max_iters = 50000;
  c.target_residual = 1e-2;
  c.log_every = 1000;
  return seeded_training(p, gen_xor(), c, 1.0, 1e-2, 5, 30.0);
}

Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2024);
  std::size_t configs = 0, failures = 0, checked = 0, excluded = 0;
  double worst = 0.0;
  std::string first_failure;
  for (int rep = 0; rep < 3; ++rep)
    for (Arch arch : {Arch::Mlp, Arch::Rnn, Arch::ResNetDirect, Arch::ResNetTilde})
      for (auto kind : {ConstraintKind::Kind::Identity, ConstraintKind::Kind::EpsAbs, ConstraintKind::Kind::EpsLin})
        for (double rho : {0.0, 0.1})
          for (double alpha : {0.0, 0.01}) {
            const auto spec = random_spec(arch, rng);
            const ConstraintKind g(kind, kind == ConstraintKind::Kind::Identity ? 0.0 : 0.1);
            auto inst = make_instance(spec, g, RegConfig{rho, alpha}, 2, rng.below(1u << 30));
            const auto r = oracles::check_lp_gradients(inst->problem, inst->states, inst->weights, inst->data);
            ++configs;
            checked += r.checked;
            excluded += r.excluded;
            worst = std::max(worst, r.max_rel_error);
            if (!r.passed()) {
              ++failures;
              if (first_failure.empty()) first_failure = " first failure: " + to_string(arch) + " " + g.name() + " " + r.worst;
            }
          }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = configs >= 100 && failures == 0 && secs < 120.0;
  o.detail = std::to_string(configs) + " configurations, " + std::to_string(checked) + " partials checked, " +
             std::to_string(excluded) + " kink-adjacent excluded, " + std::to_string(failures) + " failing" +
             fmt(", max relative error %.2e", worst) + fmt(", %.1f s", secs) + first_failure;
  return o;
}

Outcome backprop_recovery() {
  Rng rng(3);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    NetworkSpec spec = random_spec(Arch::Mlp, rng);
    spec.widths.resize(2 + static_cast<std::size_t>(k % 3), 4);
    const auto data = random_dataset(spec, 4, rng);
    worst = std::max(worst, oracles::recover_backprop_check(WeightStore::random(spec, rng.below(1000)), spec, data));
  }
  return {worst <= 1e-10, fmt("20 networks, max discrepancy %.2e", worst)};
}

Outcome multiplier_monotonicity() {
  const auto spec = mlp_spec({2, 8, 8}, 1);
  const Problem p{build_graph(spec), ConstraintKind::eps_abs(0.05), RegConfig{0.1, 0.0}};
  const Dataset d = gen_two_moons(16, 0.1, 4);
  StateStore s(p.graph, d.size());
  WeightStore w = WeightStore::random(spec, 4);
  TrainConfig c;
  std::size_t decreases = 0, increases = 0;
  for (long it = 0; it < 10000; ++it) {
    const StateStore before = s;
    step(p, s, w, d, c, it);
    for (std::size_t i = 0; i < d.size(); ++i)
      for (std::size_t n = 0; n < s.nodes(); ++n) {
        const auto& a = before.lambda(i, n);
        const auto& b = s.lambda(i, n);
        for (std::size_t k = 0; k < a.size(); ++k) {
          if (b[k] < a[k]) ++decreases;
          if (b[k] > a[k]) ++increases;
        }
      }
  }
  return {decreases == 0, "10000 iterations, " + std::to_string(decreases) + " decreases, " +
                              std::to_string(increases) + " strict increases"};
}

Outcome resnet_form_equivalence() {
  Rng rng(5);
  double worst_value = 0.0, worst_grad = 0.0;
  for (int k = 0; k < 50; ++k) {
    NetworkSpec direct = random_spec(Arch::ResNetDirect, rng);
    NetworkSpec tilde = direct;
    tilde.arch = Arch::ResNetTilde;
    const ConstraintKind kinds[] = {ConstraintKind::identity(), ConstraintKind::eps_abs(0.05),
                                    ConstraintKind::eps_lin(0.05)};
    const ConstraintKind g = kinds[k % 3];
    const RegConfig reg{k % 2 ? 0.1 : 0.0, 0.0};
    const auto seed = rng.below(1u << 30);
    auto d = make_instance(direct, g, reg, 2, seed);
    auto t = make_instance(tilde, g, reg, 2, seed);
    t->weights = d->weights;
    t->data = d->data;
    const std::size_t h = direct.hidden_layers();
    for (std::size_t i = 0; i < 2; ++i) {
      std::vector<Vector> layers{d->data.inputs[i][0]};
      for (std::size_t l = 0; l < h; ++l) layers.push_back(d->states.x(i, l));
      const auto tl = tilde_map(layers);
      for (std::size_t l = 0; l < h; ++l) {
        t->states.x_mut(i, l) = tl[l + 1];
        t->states.lambda_mut(i, l) = d->states.lambda(i, l);
      }
    }
    worst_value = std::max(worst_value, std::abs(lagrangian_value(d->problem, d->states, d->weights, d->data) -
                                                 lagrangian_value(t->problem, t->states, t->weights, t->data)));
    const auto ex = all_examples(2);
    const Gradient gd = full_gradient(d->problem, d->states, d->weights, d->data, ex);
    const Gradient gt = full_gradient(t->problem, t->states, t->weights, t->data, ex);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < h; ++j) {
        Vector expect(direct.widths[j + 1], 0.0);
        for (std::size_t l = j; l < h; ++l) linalg::axpy(1.0, gd.x[i][l], expect);
        for (std::size_t c = 0; c < expect.size(); ++c)
          worst_grad = std::max(worst_grad, std::abs(gt.x[i][j][c] - expect[c]));
      }
  }
  return {worst_value <= 1e-12 && worst_grad <= 1e-10,
          fmt("50 instances, max |L_direct - L_tilde| %.2e", worst_value) +
              fmt(", max |grad_tilde - T^T grad| %.2e", worst_grad)};
}

Outcome locality() {
  Rng rng(6);
  std::size_t probes = 0, violations = 0;
  std::string first;
  auto probe = [&](const trace::Recorder& rec, int lo, int hi, std::optional<std::pair<int, int>> times,
                   const std::string& what) {
    ++probes;
    if (auto e = read_outside(rec, lo, hi, times)) {
      ++violations;
      if (first.empty()) first = " first: " + what + " read layer " + std::to_string(e->layer) + " t " + std::to_string(e->time);
    }
  };
  for (int rep = 0; rep < 10; ++rep)
    for (Arch arch : {Arch::Mlp, Arch::ResNetDirect, Arch::Rnn}) {
      auto spec = random_spec(arch, rng);
      auto inst = make_instance(spec, ConstraintKind::eps_lin(0.01), RegConfig{0.1, 0.01}, 2, rng.below(1000));
      auto& I = *inst;
      const bool rnn = arch == Arch::Rnn;
      const int h = static_cast<int>(spec.hidden_layers());
      trace::Recorder rec;
      auto traced = [&](auto&& f) {
        rec.clear();
        trace::Scope scope(rec);
        f();
      };
      for (std::size_t k = 0; k < I.weights.weight_count(); ++k) {
        traced([&] { (void)grad_w(I.problem, I.states, I.weights, I.data, k); });
        const int l = static_cast<int>(k) + 1;
        probe(rec, l - 1, std::min(l + 1, h + 1), std::nullopt, "grad_w");
      }
      for (std::size_t k = 0; k < I.weights.recurrent_count(); ++k) {
        traced([&] { (void)grad_u(I.problem, I.states, I.weights, I.data, k); });
        const int l = static_cast<int>(k) + 1;
        probe(rec, l - 1, l + 1, std::nullopt, "grad_u");
      }
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t v = 0; v < I.states.variables(); ++v) {
          const auto& info = I.problem.graph.variable(v);
          std::optional<std::pair<int, int>> times;
          if (rnn) times = std::pair{info.time - 1, info.time + 1};
          traced([&] { (void)grad_x(I.problem, I.states, I.weights, I.data, i, v); });
          probe(rec, info.layer - 1, info.layer + 1, times, "grad_x");
          traced([&] { (void)grad_lambda(I.problem, I.states, I.weights, I.data, i, info.defining_node); });
          probe(rec, info.layer - 1, info.layer + 1, times, "grad_lambda");
        }
    }
  return {violations == 0,
          std::to_string(probes) + " traced partials, " + std::to_string(violations) + " non-local reads" + first};
}

Outcome parallel_equivalence() {
  NetworkSpec spec = mlp_spec({3, 6, 6, 6, 6}, 2);
  auto history = [&](std::size_t workers) {
    auto inst = make_instance(spec, ConstraintKind::identity(), RegConfig{0.2, 0.0}, 8, 7, false);
    TrainConfig c;
    std::vector<IterMetrics> out;
    std::optional<LayerParallelExecutor> ex;
    if (workers > 0) ex.emplace(inst->problem, inst->data, c, workers);
    for (long it = 0; it < 100; ++it) {
      const StepOptions o{true, {}};
      out.push_back(ex ? ex->step(inst->states, inst->weights, it, o)
                       : step(inst->problem, inst->states, inst->weights, inst->data, c, it, o));
    }
    return std::pair{out, std::move(inst)};
  };
  const auto [ref, ref_inst] = history(0);
  bool ok = true;
  std::string detail = "H=4, 100 iterations:";
  for (std::size_t w : {1, 2, 5}) {
    const auto [h, inst] = history(w);
    const bool same = h == ref && inst->weights == ref_inst->weights && inst->states == ref_inst->states;
    ok = ok && same;
    detail += " workers " + std::to_string(w) + (same ? " identical;" : " DIFFERENT;");
  }
  return {ok, detail};
}

Outcome cost_linearity() {
  auto macs = [](std::size_t width) {
    NetworkSpec spec = mlp_spec({4, width, width, width}, 3);
    auto inst = make_instance(spec, ConstraintKind::identity(), RegConfig{0.1, 0.0}, 8, 8);
    linalg::reset_mac_count();
    step(inst->problem, inst->states, inst->weights, inst->data, TrainConfig{}, 0);
    return std::pair{static_cast<double>(linalg::mac_count()), static_cast<double>(inst->weights.parameter_count())};
  };
  const auto [m1, p1] = macs(16);
  const auto [m2, p2] = macs(32);
  const double ratio = (m2 / m1) / (p2 / p1);
  return {std::abs(ratio - 1.0) <= 0.1, fmt("MAC ratio %.4f", m2 / m1) + fmt(" vs |W| ratio %.4f", p2 / p1) +
                                            fmt(" (deviation %.2f%%)", 100.0 * (ratio - 1.0))};
}

// States whose every constraint argument lies strictly inside (-eps, eps).
void place_in_dead_zone(Instance& I, double eps, Rng& rng) {
  for (std::size_t i = 0; i < I.data.size(); ++i)
    for (std::size_t n = 0; n < I.states.nodes(); ++n) {
      const auto term = compute_node_term(I.problem, I.states, I.weights, I.data, i, n);
      auto& x = I.states.x_mut(i, I.problem.graph.node(n).output);
      for (std::size_t c = 0; c < x.size(); ++c) x[c] += -term.argument[c] + rng.uniform(-0.9 * eps, 0.9 * eps);
    }
}

Outcome dead_zone() {
  Rng rng(9);
  std::size_t instances = 0, bad = 0;
  for (auto kind : {ConstraintKind::Kind::EpsAbs, ConstraintKind::Kind::EpsLin})
    for (Arch arch : {Arch::Mlp, Arch::Rnn, Arch::ResNetDirect, Arch::ResNetTilde})
      for (int rep = 0; rep < 3; ++rep) {
        const double eps = 0.1;
        auto inst = make_instance(random_spec(arch, rng), ConstraintKind(kind, eps), RegConfig{0.5, 0.0}, 3,
                                  rng.below(1000));
        auto& I = *inst;
        place_in_dead_zone(I, eps, rng);
        ++instances;
        const auto ex = all_examples(I.data.size());
        TermCache terms(I.problem, I.states, I.weights, I.data);
        const auto sum = summarize(terms, ex);
        const Gradient g = full_gradient(terms, ex);
        // the constraint part of the value, term by term; L and the loss sum
        // are grouped differently, so they are compared to rounding only
        double contribution = 0.0;
        for (std::size_t i = 0; i < I.data.size(); ++i)
          for (std::size_t n = 0; n < I.states.nodes(); ++n) {
            const auto& r = terms.node(i, n).residual;
            contribution += linalg::dot(I.states.lambda(i, n), r) + I.problem.reg.rho * linalg::dot(r, r);
            for (double c : terms.node(i, n).multiplier) contribution += std::abs(c);
          }
        bool ok = contribution == 0.0 && sum.max_abs_residual == 0.0 &&
                  std::abs(sum.lagrangian - sum.loss_term) <= 1e-14 * std::abs(sum.loss_term);
        // loss-only reference for the state gradients
        std::vector<std::vector<Vector>> ref(I.data.size());
        for (std::size_t i = 0; i < I.data.size(); ++i) {
          for (std::size_t v = 0; v < I.states.variables(); ++v) ref[i].emplace_back(I.problem.graph.variable(v).width, 0.0);
          const auto taps = I.problem.graph.loss_taps();
          for (std::size_t t = 0; t < taps.size(); ++t)
            for (const auto& op : taps[t].top)
              if (op.source == Operand::Source::State) linalg::axpy(1.0, terms.loss(i, t).top_grad, ref[i][op.index]);
          for (std::size_t v = 0; v < I.states.variables(); ++v) ok = ok && g.x[i][v] == ref[i][v];
          for (std::size_t n = 0; n < I.states.nodes(); ++n)
            for (double c : g.lambda[i][n]) ok = ok && c == 0.0;
        }
        for (std::size_t k = 0; k + 1 < g.w.size(); ++k)
          for (double c : g.w[k].data()) ok = ok && c == 0.0;
        for (const auto& u : g.u)
          for (double c : u.data()) ok = ok && c == 0.0;
        if (!ok) ++bad;
      }
  return {bad == 0, std::to_string(instances) + " instances (both kinds, all forms), " + std::to_string(bad) +
                        " with a nonzero constraint contribution"};
}

Outcome recurrent_parity() {
  NetworkSpec spec = mlp_spec({1, 8}, 1, ActivationKind::Tanh, true);
  spec.arch = Arch::Rnn;
  spec.seq_len = 4;
  const Problem p{build_graph(spec), ConstraintKind::identity(), RegConfig{0.5, 0.0}};
  TrainConfig c;
  c.eta_w = 0.01;
  c.eta_x = 0.2;
  c.eta_lambda = 0.1;
  c.max_iters = 100000;
  c.target_residual = 1e-2;
  c.log_every = 1000;
  return seeded_training(p, gen_parity_sequences(64, 4, 10), c, 0.95, 1e-2, 5, 1e9);
}

}  // namespace

// With an argument ("recovery"), runs only that criterion.
int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"trainability", xor_trainability},
      {"gradients", gradient_correctness},
      {"recovery", backprop_recovery},
      {"monotonicity", multiplier_monotonicity},
      {"resnet_forms", resnet_form_equivalence},
      {"locality", locality},
      {"parallel", parallel_equivalence},
      {"cost", cost_linearity},
      {"dead_zone", dead_zone},
      {"recurrent", recurrent_parity},
  };
  const std::string only = argc > 1 ? argv[1] : "";
  int failed = 0, ran = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && only != name) continue;
    ++ran;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  if (ran == 0) {
    std::printf("no criterion named %s\n", only.c_str());
    return 1;
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
