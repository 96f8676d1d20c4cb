#include "lp/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "lp/architectures.hpp"
#include "lp/cli/config.hpp"
#include "lp/error.hpp"
#include "lp/oracles.hpp"
#include "lp/parallel.hpp"
#include "lp/rng.hpp"
#include "lp/weights_io.hpp"

namespace lp::cli {

namespace {

namespace fs = std::filesystem;

struct Session {
  ExperimentConfig config;
  Dataset data;
  NetworkSpec spec;
};

Session open_session(const std::string& config_path, const Overrides& overrides) {
  Session s;
  s.config = load_config(config_path);
  if (overrides.workers) {
    if (*overrides.workers == 0) throw ConfigError("--workers", "must be >= 1");
    s.config.workers = *overrides.workers;
  }
  if (overrides.seed) s.config.train.seed = *overrides.seed;
  if (overrides.out_dir) s.config.out_dir = *overrides.out_dir;
  s.data = make_dataset(s.config.dataset);
  s.data.validate();
  s.spec = resolve_spec(s.config, s.data);
  return s;
}

fs::path output_path(const ExperimentConfig& config, const std::string& name) {
  const fs::path p(name);
  return p.is_absolute() ? p : fs::path(config.out_dir) / p;
}

// Exceptions shared by every command, mapped to exit codes.
template <typename F>
int guarded(const Logger& log, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log.error(std::string("config: ") + e.what());
    return kInputError;
  } catch (const DataError& e) {
    log.error(std::string("input: ") + e.what());
    return kInputError;
  } catch (const DimensionError& e) {
    log.error(std::string("shape: ") + e.what());
    return kInputError;
  } catch (const DivergenceError& e) {
    log.error(std::string("diverged: ") + e.what());
    return kDiverged;
  } catch (const fs::filesystem_error& e) {
    log.error(std::string("io: ") + e.what());
    return kInputError;
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

std::string metrics_json(const IterMetrics& m) {
  // Insertion order is kept so every line has the same field layout.
  nlohmann::ordered_json j;
  auto num = [](double v) -> nlohmann::ordered_json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  j["iter"] = m.iter;
  j["lagrangian"] = num(m.lagrangian);
  j["loss_term"] = num(m.loss_term);
  j["max_abs_residual"] = num(m.max_abs_residual);
  j["mean_abs_residual"] = num(m.mean_abs_residual);
  j["lambda_l1"] = num(m.lambda_l1);
  j["accuracy"] = m.train_accuracy ? nlohmann::ordered_json(*m.train_accuracy) : nlohmann::ordered_json(nullptr);
  return j.dump();
}

int cmd_train(const std::string& config_path, const Overrides& overrides, std::ostream& out, const Logger& log) {
  return guarded(log, [&] {
    Session s = open_session(config_path, overrides);
    const auto& config = s.config;
    Problem problem{build_graph(s.spec), config.constraint, config.reg};

    fs::create_directories(config.out_dir);
    const auto metrics_path = output_path(config, config.metrics_file);
    std::ofstream metrics(metrics_path);
    if (!metrics) throw DataError("cannot write metrics file '" + metrics_path.string() + "'");

    TrainHooks hooks;
    std::unique_ptr<LayerParallelExecutor> executor;
    if (config.workers > 1) {
      executor = std::make_unique<LayerParallelExecutor>(problem, s.data, config.train, config.workers);
      log.debug("layer-parallel execution with " + std::to_string(executor->workers()) + " workers");
      hooks.stepper = [&](StateStore& st, WeightStore& w, long iter, const StepOptions& opts) {
        return executor->step(st, w, iter, opts);
      };
    }
    hooks.on_log = [&](const IterMetrics& m) {
      metrics << metrics_json(m) << '\n';
      metrics.flush();
      log.debug("iter " + std::to_string(m.iter) + " L=" + fmt(m.lagrangian) + " max|G|=" + fmt(m.max_abs_residual));
    };

    log.info("training " + to_string(s.spec.arch) + " with " + std::to_string(s.data.size()) + " examples");
    TrainRun run;
    try {
      run = train(problem, s.data, config.train, hooks);
    } catch (const DivergenceError& e) {
      log.error("divergence report: variable " + e.variable() + ", iteration " + std::to_string(e.iteration()) +
                "; metrics up to the failing step are in " + metrics_path.string());
      throw;
    }

    // closing record: the final stores, accuracy included
    metrics << metrics_json(run.final) << '\n';
    metrics.flush();

    const auto weights_path = output_path(config, config.weights_file);
    save_weights(weights_path.string(), s.spec, run.weights);
    const auto& f = run.final;
    out << "iterations " << run.iterations << (run.reason == StopReason::Converged ? " (converged)" : "") << '\n'
        << "lagrangian " << fmt(f.lagrangian) << '\n'
        << "loss_term " << fmt(f.loss_term) << '\n'
        << "max_abs_residual " << fmt(f.max_abs_residual) << '\n'
        << "accuracy " << fmt(f.train_accuracy.value_or(0.0)) << '\n'
        << "metrics " << metrics_path.string() << '\n'
        << "weights " << weights_path.string() << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_gradcheck(const std::string& config_path, const Overrides& overrides, std::ostream& out, const Logger& log) {
  return guarded(log, [&] {
    Session s = open_session(config_path, overrides);
    const auto& config = s.config;
    const auto& gc = config.gradcheck;

    Dataset data = s.data;
    if (data.size() > gc.max_examples) {
      data.inputs.resize(gc.max_examples);
      data.targets.resize(gc.max_examples);
      if (!data.step_targets.empty()) data.step_targets.resize(gc.max_examples);
    }
    Problem problem{build_graph(s.spec), config.constraint, config.reg};

    // a generic point: random weights, states and multipliers
    const WeightStore weights = WeightStore::random(s.spec, config.train.seed);
    StateStore states(problem.graph, data.size());
    Rng rng(config.train.seed + 1);
    for (std::size_t i = 0; i < data.size(); ++i) {
      for (std::size_t v = 0; v < states.variables(); ++v)
        for (double& x : states.x_mut(i, v)) x = rng.uniform(-gc.state_scale, gc.state_scale);
      for (std::size_t n = 0; n < states.nodes(); ++n)
        for (double& l : states.lambda_mut(i, n)) l = rng.uniform(-gc.state_scale, gc.state_scale);
    }

    oracles::GradCheckOptions options;
    options.h = gc.h;
    options.h_confirm = gc.h_confirm;
    options.rel_tol = gc.rel_tol;
    options.abs_tol = gc.abs_tol;
    options.kink_margin = gc.kink_margin;
    if (gc.corrupt) {
      options.corrupt = [](Gradient& g) { g.w.front()(0, 0) += 1e-2; };
    }
    const auto report = oracles::check_lp_gradients(problem, states, weights, data, options);
    out << "fd_checked " << report.checked << '\n'
        << "fd_excluded " << report.excluded << '\n'
        << "fd_failures " << report.failures << '\n'
        << "fd_max_rel_error " << fmt(report.max_rel_error) << '\n'
        << "fd_max_abs_error " << fmt(report.max_abs_error) << '\n';
    if (!report.worst.empty()) out << "fd_worst " << report.worst << '\n';
    bool ok = report.passed();

    if (s.spec.arch == Arch::Mlp && config.constraint.kind() == ConstraintKind::Kind::Identity) {
      const double d = oracles::recover_backprop_check(weights, s.spec, data);
      out << "recovery_discrepancy " << std::scientific << std::setprecision(3) << d << std::defaultfloat << '\n';
      if (!(d <= gc.recovery_tol)) {
        log.error("backprop recovery discrepancy " + fmt(d) + " exceeds " + fmt(gc.recovery_tol));
        ok = false;
      }
    }
    if (!report.passed()) log.error(std::to_string(report.failures) + " partial(s) disagree with finite differences");
    out << (ok ? "PASS" : "FAIL") << '\n';
    return static_cast<int>(ok ? kOk : kCheckFailed);
  });
}

namespace {

std::size_t count_columns(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open csv file '" + path + "'");
  std::string line;
  bool skip = header;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (skip) {
      skip = false;
      continue;
    }
    return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  }
  return 0;
}

}  // namespace

int cmd_infer(const InferRequest& request, std::ostream& out, const Logger& log) {
  return guarded(log, [&] {
    const WeightsFile file = load_weights(request.weights_path);
    const auto& spec = file.spec;
    const std::size_t in_cols = spec.seq_len * spec.input_width();
    const std::size_t columns = count_columns(request.data_path, request.header);

    Dataset data;
    if (columns > 0) {
      if (columns != in_cols && columns != in_cols + spec.output_width) {
        throw DimensionError("data has " + std::to_string(columns) + " columns; the network needs " +
                             std::to_string(in_cols) + " inputs (optionally followed by " +
                             std::to_string(spec.output_width) + " targets)");
      }
      CsvOptions csv;
      csv.header = request.header;
      csv.seq_len = spec.seq_len;
      for (std::size_t c = 0; c < in_cols; ++c) csv.input_cols.push_back(c);
      for (std::size_t c = in_cols; c < columns; ++c) csv.target_cols.push_back(c);
      data = load_csv(request.data_path, csv);
    }

    std::ofstream file_out;
    std::ostream* sink = &out;
    if (!request.output_path.empty()) {
      file_out.open(request.output_path);
      if (!file_out) throw DataError("cannot write predictions to '" + request.output_path + "'");
      sink = &file_out;
    }

    const auto graph = build_graph(spec);
    std::ostream& os = *sink;
    os << std::setprecision(17);
    for (std::size_t k = 0; k < spec.output_width; ++k) os << (k ? "," : "") << "y" << k;
    os << ",class\n";
    std::size_t correct = 0;
    const bool labelled = columns == in_cols + spec.output_width && columns > in_cols;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Vector y = infer(graph, file.weights, data.inputs[i]);
      for (std::size_t k = 0; k < y.size(); ++k) os << (k ? "," : "") << y[k];
      const auto cls = predicted_class(y);
      os << "," << cls << '\n';
      if (labelled && cls == predicted_class(data.targets[i])) ++correct;
    }
    log.info("wrote " + std::to_string(data.size()) + " predictions");
    if (labelled && data.size() > 0) {
      log.info("accuracy " + fmt(static_cast<double>(correct) / static_cast<double>(data.size())));
    }
    return static_cast<int>(kOk);
  });
}

}  // namespace lp::cli
