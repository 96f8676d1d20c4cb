#include "lp/stores.hpp"

#include <cmath>
#include <string>

#include "lp/error.hpp"
#include "lp/rng.hpp"

namespace lp {

StateStore::StateStore(const ConstraintGraph& graph, std::size_t examples) {
  std::vector<Vector> x0;
  std::vector<Vector> l0;
  for (const auto& v : graph.variables()) {
    var_tags_.push_back({v.layer, v.time});
    x0.emplace_back(v.width, 0.0);
  }
  for (const auto& n : graph.nodes()) {
    node_tags_.push_back({n.layer, n.time});
    l0.emplace_back(graph.variable(n.output).width, 0.0);
  }
  x_.assign(examples, x0);
  lambda_.assign(examples, l0);
}

namespace {

struct Shape {
  std::size_t rows;
  std::size_t cols;
};

std::vector<Shape> weight_shapes(const NetworkSpec& spec) {
  const std::size_t h = spec.hidden_layers();
  const std::size_t extra = spec.bias ? 1 : 0;
  std::vector<Shape> shapes;
  for (std::size_t k = 0; k < h; ++k) shapes.push_back({spec.widths[k + 1], spec.widths[k] + extra});
  shapes.push_back({spec.output_width, spec.widths[h] + extra});
  return shapes;
}

std::vector<Shape> recurrent_shapes(const NetworkSpec& spec) {
  std::vector<Shape> shapes;
  if (spec.arch != Arch::Rnn) return shapes;
  for (std::size_t k = 0; k < spec.hidden_layers(); ++k) shapes.push_back({spec.widths[k + 1], spec.widths[k + 1]});
  return shapes;
}

}  // namespace

WeightStore WeightStore::zeros(const NetworkSpec& spec) {
  spec.validate();
  WeightStore ws;
  for (auto s : weight_shapes(spec)) ws.w_.emplace_back(s.rows, s.cols);
  for (auto s : recurrent_shapes(spec)) ws.u_.emplace_back(s.rows, s.cols);
  return ws;
}

WeightStore WeightStore::random(const NetworkSpec& spec, std::uint64_t seed) {
  WeightStore ws = zeros(spec);
  Rng rng(seed);
  auto fill = [&rng](Matrix& m) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(m.cols()));
    for (double& v : m.data()) v = rng.uniform(-bound, bound);
  };
  for (auto& m : ws.w_) fill(m);
  for (auto& m : ws.u_) fill(m);
  return ws;
}

std::size_t WeightStore::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& m : w_) n += m.size();
  for (const auto& m : u_) n += m.size();
  return n;
}

void WeightStore::check_shapes(const NetworkSpec& spec) const {
  const auto ws = weight_shapes(spec);
  const auto us = recurrent_shapes(spec);
  if (ws.size() != w_.size() || us.size() != u_.size()) {
    throw DimensionError("weights: expected " + std::to_string(ws.size()) + " weight and " +
                         std::to_string(us.size()) + " recurrent matrices");
  }
  auto check = [](const Matrix& m, Shape s, const std::string& name) {
    if (m.rows() != s.rows || m.cols() != s.cols) {
      throw DimensionError("weights: " + name + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                           ", expected " + std::to_string(s.rows) + "x" + std::to_string(s.cols));
    }
  };
  for (std::size_t k = 0; k < ws.size(); ++k) check(w_[k], ws[k], "W" + std::to_string(k));
  for (std::size_t k = 0; k < us.size(); ++k) check(u_[k], us[k], "U" + std::to_string(k));
}

}  // namespace lp
