#pragma once

// Layer-parallel Jacobi step.
//
// The network is split into H+1 layer units; unit k owns W_k and, for
// k >= 1, the layer-k states and multipliers. Each step runs bulk-synchronous
// phases separated by barriers:
//
//   1. unit k computes the node terms of layer k (and unit H the loss terms)
//      from the frozen stores;
//   2. unit k assembles dL/dW_k, dL/dx_k and dL/dlambda_k from the terms of
//      layers k and k+1;
//   3. the coordinator reduces metrics and checks for non-finite values;
//   4. unit k applies its own updates.
//
// Every value is produced by the same functions and reduction order as
// lp::step, so results are bitwise identical for any worker count.

#include <barrier>
#include <chrono>
#include <cstddef>
#include <exception>
#include <memory>
#include <optional>
#include <thread>
#include <vector>

#include "lp/optimizer.hpp"
#include "lp/trace.hpp"

namespace lp {

class LayerParallelExecutor {
 public:
  /// `workers` is clamped to [1, H+1]. Throws ConfigError for graphs whose
  /// dependencies are not nearest-neighbour (resnet_tilde, rnn).
  LayerParallelExecutor(const Problem& problem, const Dataset& data, const TrainConfig& config, std::size_t workers);
  ~LayerParallelExecutor();

  LayerParallelExecutor(const LayerParallelExecutor&) = delete;
  LayerParallelExecutor& operator=(const LayerParallelExecutor&) = delete;

  IterMetrics step(StateStore& states, WeightStore& weights, long iter, const StepOptions& options = {});

  std::size_t workers() const noexcept { return workers_; }
  std::size_t units() const noexcept { return units_; }
  /// First and one-past-last unit handled by worker w.
  std::pair<std::size_t, std::size_t> unit_range(std::size_t worker) const noexcept;

  /// Per-unit recorders (size units()); every access made on behalf of unit k
  /// during a step is recorded into recorders[k]. Pass nullptr to disable.
  void set_unit_traces(std::vector<trace::Recorder>* recorders) { traces_ = recorders; }

 private:
  struct Job;
  void worker_loop(std::size_t worker);
  void run_phase(int phase, std::size_t worker);

  const Problem& problem_;
  const Dataset& data_;
  TrainConfig config_;
  std::size_t units_ = 0;
  std::size_t workers_ = 1;
  std::vector<trace::Recorder>* traces_ = nullptr;

  std::unique_ptr<Job> job_;
  std::barrier<> sync_;
  bool stop_ = false;
  std::vector<std::exception_ptr> errors_;
  std::vector<std::jthread> threads_;
};

/// One-shot convenience wrapper around LayerParallelExecutor::step.
IterMetrics parallel_step(const Problem& problem, StateStore& states, WeightStore& weights, const Dataset& data,
                          const TrainConfig& config, std::size_t workers, long iter = 0,
                          const StepOptions& options = {});

struct SpeedupRow {
  std::size_t workers = 0;
  double seconds_per_iter = 0.0;
};

struct SpeedupReport {
  std::vector<SpeedupRow> rows;
  std::size_t requested_workers = 0;
  bool clamped = false;
  std::size_t hardware_threads = 0;
};

/// Wall-clock per iteration for 1..workers on a random dataset of `examples`
/// examples. Measurement only; nothing is asserted.
SpeedupReport speedup_probe(const NetworkSpec& spec, std::size_t examples, std::size_t workers, long iterations,
                            std::uint64_t seed = 0);

}  // namespace lp
