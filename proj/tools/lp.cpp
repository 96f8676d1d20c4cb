#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lp/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace lp::cli;
  CLI::App app{"Local propagation: Lagrangian saddle-point training"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "experiment config file")->required();
    cmd->add_option("--workers", workers, "layer-parallel worker threads");
    cmd->add_option("--seed", seed, "overrides train.seed");
    cmd->add_option("--out", out_dir, "output directory");
  };
  auto* train = app.add_subcommand("train", "train a network");
  add_common(train);
  auto* gradcheck = app.add_subcommand("gradcheck", "check analytic gradients against oracles");
  add_common(gradcheck);

  InferRequest req;
  auto* infer = app.add_subcommand("infer", "forward-pass predictions from a weights file");
  infer->add_option("--weights", req.weights_path, "weights file")->required();
  infer->add_option("--data", req.data_path, "input csv")->required();
  infer->add_flag("--header", req.header, "first csv row is a header");
  infer->add_option("--out", req.output_path, "predictions csv (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  const Logger log(std::cerr, log_level_from_env());
  const Overrides overrides{workers, seed, out_dir};
  if (*train) return cmd_train(config, overrides, std::cout, log);
  if (*gradcheck) return cmd_gradcheck(config, overrides, std::cout, log);
  return cmd_infer(req, std::cout, log);
}
