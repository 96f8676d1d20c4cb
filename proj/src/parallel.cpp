#include "lp/parallel.hpp"

#include <algorithm>
#include <cmath>

#include "lp/architectures.hpp"
#include "lp/error.hpp"
#include "lp/rng.hpp"

namespace lp {

struct LayerParallelExecutor::Job {
  StateStore* states = nullptr;
  WeightStore* weights = nullptr;
  std::span<const std::size_t> examples;
  std::optional<TermCache> terms;
  Gradient grad;
  bool abort = false;
};

namespace {

std::size_t clamp_workers(std::size_t requested, std::size_t units) {
  return std::clamp<std::size_t>(requested, 1, units);
}

}  // namespace

LayerParallelExecutor::LayerParallelExecutor(const Problem& problem, const Dataset& data, const TrainConfig& config,
                                             std::size_t workers)
    : problem_(problem),
      data_(data),
      config_(config),
      units_(problem.graph.hidden_layers() + 1),
      workers_(clamp_workers(workers, problem.graph.hidden_layers() + 1)),
      job_(std::make_unique<Job>()),
      sync_(static_cast<std::ptrdiff_t>(workers_)),
      errors_(workers_) {
  const auto arch = problem.graph.spec().arch;
  if (arch != Arch::Mlp && arch != Arch::ResNetDirect) {
    throw ConfigError("run.workers", "layer-parallel execution needs nearest-neighbour layer dependencies (mlp or "
                                     "resnet); " + to_string(arch) + " layers read beyond adjacent layers");
  }
  if (workers == 0) throw ConfigError("run.workers", "must be >= 1");
  for (std::size_t w = 1; w < workers_; ++w) threads_.emplace_back([this, w] { worker_loop(w); });
}

LayerParallelExecutor::~LayerParallelExecutor() {
  if (!threads_.empty()) {
    stop_ = true;
    sync_.arrive_and_wait();
  }
}

std::pair<std::size_t, std::size_t> LayerParallelExecutor::unit_range(std::size_t worker) const noexcept {
  return {worker * units_ / workers_, (worker + 1) * units_ / workers_};
}

void LayerParallelExecutor::run_phase(int phase, std::size_t worker) {
  auto& job = *job_;
  const std::size_t h = units_ - 1;
  const auto [first, last] = unit_range(worker);
  for (std::size_t k = first; k < last; ++k) {
    std::optional<trace::Scope> scope;
    if (traces_ != nullptr) scope.emplace((*traces_)[k]);
    const bool owns_layer = k >= 1;
    const std::size_t slot = k - 1;  // variable and node id of layer k
    switch (phase) {
      case 1:
        for (std::size_t i : job.examples) {
          if (owns_layer) job.terms->fill_node(i, slot);
          if (k == h)
            for (std::size_t t = 0; t < problem_.graph.loss_taps().size(); ++t) job.terms->fill_loss(i, t);
        }
        break;
      case 2:
        job.grad.w[k] = assemble_grad_w(*job.terms, job.examples, k);
        if (owns_layer) {
          for (std::size_t i : job.examples) {
            job.grad.x[i][slot] = assemble_grad_x(*job.terms, i, slot);
            job.grad.lambda[i][slot] = assemble_grad_lambda(*job.terms, i, slot);
          }
        }
        break;
      case 3:
        update_weight(*job.weights, job.grad, k, config_);
        if (owns_layer) {
          for (std::size_t i : job.examples) {
            update_state(*job.states, job.grad, i, slot, config_);
            update_multiplier(*job.states, job.grad, i, slot, config_);
          }
        }
        break;
      default: break;
    }
  }
}

void LayerParallelExecutor::worker_loop(std::size_t worker) {
  auto guarded = [&](int phase) {
    try {
      run_phase(phase, worker);
    } catch (...) {
      errors_[worker] = std::current_exception();
    }
  };
  for (;;) {
    sync_.arrive_and_wait();  // start
    if (stop_) return;
    guarded(1);
    sync_.arrive_and_wait();
    guarded(2);
    sync_.arrive_and_wait();
    sync_.arrive_and_wait();  // coordinator checks
    if (!job_->abort) guarded(3);
    sync_.arrive_and_wait();  // done
  }
}

IterMetrics LayerParallelExecutor::step(StateStore& states, WeightStore& weights, long iter,
                                        const StepOptions& options) {
  std::vector<std::size_t> everything;
  auto examples = options.examples;
  if (examples.empty()) {
    everything = all_examples(data_.size());
    examples = everything;
  }

  std::optional<double> acc;
  if (options.compute_accuracy) acc = accuracy(problem_.graph, weights, data_);

  auto& job = *job_;
  job.states = &states;
  job.weights = &weights;
  job.examples = examples;
  job.terms.emplace(problem_, states, weights, data_);
  job.abort = false;
  job.grad = Gradient{};
  job.grad.w.resize(weights.weight_count());
  job.grad.x.assign(states.examples(), {});
  job.grad.lambda.assign(states.examples(), {});
  for (std::size_t i : examples) {
    job.grad.x[i].resize(states.variables());
    job.grad.lambda[i].resize(states.nodes());
  }
  std::fill(errors_.begin(), errors_.end(), nullptr);

  const bool threaded = workers_ > 1;
  auto guarded = [&](int phase) {
    try {
      run_phase(phase, 0);
    } catch (...) {
      errors_[0] = std::current_exception();
    }
  };
  if (threaded) sync_.arrive_and_wait();
  guarded(1);
  if (threaded) sync_.arrive_and_wait();
  guarded(2);
  if (threaded) sync_.arrive_and_wait();

  // serial section: workers are parked at the next barrier
  std::exception_ptr failure;
  LagrangianSummary summary;
  for (auto& e : errors_)
    if (e && !failure) failure = e;
  if (!failure) {
    try {
      summary = summarize(*job.terms, examples);
      if (!std::isfinite(summary.lagrangian)) throw DivergenceError("lagrangian", iter);
      if (auto bad = find_nonfinite(problem_, job.grad, examples)) throw DivergenceError(*bad, iter);
    } catch (...) {
      failure = std::current_exception();
    }
  }
  job.abort = static_cast<bool>(failure);

  if (threaded) sync_.arrive_and_wait();
  if (!job.abort) guarded(3);
  if (threaded) sync_.arrive_and_wait();

  job.terms.reset();
  if (failure) std::rethrow_exception(failure);
  for (auto& e : errors_)
    if (e) std::rethrow_exception(e);
  return to_metrics(iter, summary, acc);
}

IterMetrics parallel_step(const Problem& problem, StateStore& states, WeightStore& weights, const Dataset& data,
                          const TrainConfig& config, std::size_t workers, long iter, const StepOptions& options) {
  LayerParallelExecutor executor(problem, data, config, workers);
  return executor.step(states, weights, iter, options);
}

SpeedupReport speedup_probe(const NetworkSpec& spec, std::size_t examples, std::size_t workers, long iterations,
                            std::uint64_t seed) {
  Problem problem{build_graph(spec), ConstraintKind::identity(), RegConfig{}};
  Rng rng(seed);
  Dataset data;
  for (std::size_t i = 0; i < examples; ++i) {
    Vector x(spec.input_width());
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    Vector y(spec.output_width);
    for (double& v : y) v = rng.uniform(-1.0, 1.0);
    data.inputs.push_back({std::move(x)});
    data.targets.push_back(std::move(y));
  }
  TrainConfig config;
  config.seed = seed;

  SpeedupReport report;
  report.requested_workers = workers;
  report.hardware_threads = std::thread::hardware_concurrency();
  const std::size_t units = spec.hidden_layers() + 1;
  report.clamped = workers > units;
  const std::size_t top = std::clamp<std::size_t>(workers, 1, units);

  for (std::size_t w = 1; w <= top; ++w) {
    StateStore states(problem.graph, data.size());
    WeightStore weights = WeightStore::random(spec, seed);
    LayerParallelExecutor executor(problem, data, config, w);
    const auto start = std::chrono::steady_clock::now();
    for (long it = 0; it < iterations; ++it) executor.step(states, weights, it);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    report.rows.push_back({w, iterations > 0 ? elapsed.count() / static_cast<double>(iterations) : 0.0});
  }
  return report;
}

}  // namespace lp
