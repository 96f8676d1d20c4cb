// Wall-clock per iteration of the layer-parallel step for 1..N workers.
// Nothing is asserted; results depend on the machine.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "lp/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"layer-parallel speedup probe"};
  std::size_t depth = 32, width = 16, examples = 64, workers = 4;
  long iterations = 20;
  app.add_option("--depth", depth, "hidden layers H");
  app.add_option("--width", width, "width of every layer");
  app.add_option("--examples", examples, "random examples");
  app.add_option("--workers", workers, "largest worker count probed");
  app.add_option("--iterations", iterations, "timed iterations per worker count");
  CLI11_PARSE(app, argc, argv);

  lp::NetworkSpec spec;
  spec.widths.assign(depth + 1, width);
  spec.output_width = width;
  try {
    const auto report = lp::speedup_probe(spec, examples, workers, iterations);
    std::printf("hardware threads: %zu\n", report.hardware_threads);
    if (report.clamped) std::printf("workers clamped to H+1 = %zu\n", depth + 1);
    const double base = report.rows.empty() ? 0.0 : report.rows.front().seconds_per_iter;
    std::printf("workers  s/iter      speedup\n");
    for (const auto& row : report.rows) {
      std::printf("%7zu  %.3e  %.2f\n", row.workers, row.seconds_per_iter,
                  row.seconds_per_iter > 0 ? base / row.seconds_per_iter : 0.0);
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
