#include "lp/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "lp/error.hpp"
#include "lp/rng.hpp"

namespace lp {

std::size_t Dataset::input_width() const noexcept {
  if (inputs.empty() || inputs.front().empty()) return 0;
  return inputs.front().front().size();
}

void Dataset::validate() const {
  if (inputs.size() != targets.size()) {
    throw DataError("dataset: " + std::to_string(inputs.size()) + " inputs but " + std::to_string(targets.size()) +
                    " targets");
  }
  if (!step_targets.empty() && step_targets.size() != inputs.size()) {
    throw DataError("dataset: per-step targets do not cover every example");
  }
  const std::size_t t = seq_len();
  const std::size_t din = input_width();
  const std::size_t dout = target_width();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != t) throw DataError("dataset: example " + std::to_string(i) + " has a different length");
    for (const auto& v : inputs[i]) {
      if (v.size() != din) throw DataError("dataset: example " + std::to_string(i) + " has a ragged input");
    }
    if (targets[i].size() != dout) throw DataError("dataset: example " + std::to_string(i) + " has a ragged target");
    if (!step_targets.empty()) {
      if (step_targets[i].size() != t) throw DataError("dataset: per-step targets of example " + std::to_string(i));
      for (const auto& v : step_targets[i]) {
        if (v.size() != dout) throw DataError("dataset: per-step target width of example " + std::to_string(i));
      }
    }
  }
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, std::size_t line, std::size_t col) {
  const std::string cell = trim(raw);
  double v = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  // from_chars rejects a leading '+', accept it explicitly
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw DataError("csv line " + std::to_string(line) + ", column " + std::to_string(col) + ": non-numeric cell '" +
                    cell + "'");
  }
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open csv file '" + path + "'");
  if (options.input_cols.empty()) throw ConfigError("dataset.input_cols", "at least one input column required");
  if (options.seq_len == 0 || options.input_cols.size() % options.seq_len != 0) {
    throw ConfigError("dataset.input_cols", "input column count must be a multiple of the sequence length");
  }
  if (options.one_hot && options.target_cols.size() != 1) {
    throw ConfigError("dataset.one_hot", "one-hot encoding needs exactly one target column");
  }

  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  bool header_pending = options.header;
  const std::size_t step_width = options.input_cols.size() / options.seq_len;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_row(line);
    if (columns == 0) {
      columns = cells.size();
    } else if (cells.size() != columns) {
      throw DataError("csv line " + std::to_string(line_no) + ": ragged row with " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(columns));
    }
    auto cell_at = [&](std::size_t c) -> const std::string& {
      if (c >= cells.size()) {
        throw DataError("csv line " + std::to_string(line_no) + ": column " + std::to_string(c) + " out of range");
      }
      return cells[c];
    };
    if (header_pending) {
      header_pending = false;
      for (auto c : options.input_cols) data.input_names.push_back(trim(cell_at(c)));
      for (auto c : options.target_cols) data.target_names.push_back(trim(cell_at(c)));
      continue;
    }

    std::vector<Vector> seq(options.seq_len, Vector(step_width));
    for (std::size_t k = 0; k < options.input_cols.size(); ++k) {
      const auto c = options.input_cols[k];
      seq[k / step_width][k % step_width] = parse_cell(cell_at(c), line_no, c);
    }
    Vector target;
    if (options.one_hot) {
      const auto c = options.target_cols.front();
      const double label = parse_cell(cell_at(c), line_no, c);
      if (label < 0 || label != std::floor(label) || label >= static_cast<double>(*options.one_hot)) {
        throw DataError("csv line " + std::to_string(line_no) + ": class label out of range");
      }
      target.assign(*options.one_hot, 0.0);
      target[static_cast<std::size_t>(label)] = 1.0;
    } else {
      for (auto c : options.target_cols) target.push_back(parse_cell(cell_at(c), line_no, c));
    }
    data.inputs.push_back(std::move(seq));
    data.targets.push_back(std::move(target));
  }
  data.validate();
  return data;
}

Dataset gen_xor() {
  Dataset d;
  const double pts[4][3] = {{0, 0, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
  for (const auto& p : pts) {
    d.inputs.push_back({Vector{p[0], p[1]}});
    d.targets.push_back(Vector{p[2]});
  }
  d.input_names = {"x1", "x2"};
  d.target_names = {"y"};
  return d;
}

Dataset gen_two_moons(std::size_t n, double noise, std::uint64_t seed) {
  if (n == 0) throw ConfigError("dataset.n", "must be at least 1");
  Rng rng(seed);
  Dataset d;
  const std::size_t upper = n / 2 + n % 2;
  const std::size_t lower = n - upper;
  auto angle = [](std::size_t k, std::size_t count) {
    return count <= 1 ? 0.0 : std::numbers::pi * static_cast<double>(k) / static_cast<double>(count - 1);
  };
  for (std::size_t k = 0; k < upper; ++k) {
    const double a = angle(k, upper);
    d.inputs.push_back({Vector{std::cos(a), std::sin(a)}});
    d.targets.push_back(Vector{0.0});
  }
  for (std::size_t k = 0; k < lower; ++k) {
    const double a = angle(k, lower);
    d.inputs.push_back({Vector{1.0 - std::cos(a), 0.5 - std::sin(a)}});
    d.targets.push_back(Vector{1.0});
  }
  if (noise > 0.0) {
    for (auto& seq : d.inputs)
      for (double& v : seq.front()) v += noise * rng.normal();
  }
  d.input_names = {"x1", "x2"};
  d.target_names = {"label"};
  return d;
}

Dataset gen_parity_sequences(std::size_t n, std::size_t seq_len, std::uint64_t seed) {
  if (n == 0) throw ConfigError("dataset.n", "must be at least 1");
  if (seq_len == 0) throw ConfigError("dataset.seq_len", "must be at least 1");
  Rng rng(seed);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Vector> seq;
    std::vector<Vector> running;
    int parity = 0;
    for (std::size_t t = 0; t < seq_len; ++t) {
      const int bit = rng.coin() ? 1 : 0;
      parity ^= bit;
      seq.push_back(Vector{static_cast<double>(bit)});
      running.push_back(Vector{static_cast<double>(parity)});
    }
    d.inputs.push_back(std::move(seq));
    d.targets.push_back(Vector{static_cast<double>(parity)});
    d.step_targets.push_back(std::move(running));
  }
  d.input_names = {"bit"};
  d.target_names = {"parity"};
  return d;
}

void standardize(Dataset& data) {
  const std::size_t w = data.input_width();
  if (data.size() == 0 || w == 0) return;
  std::size_t count = 0;
  Vector mean(w, 0.0);
  for (const auto& seq : data.inputs)
    for (const auto& v : seq) {
      for (std::size_t k = 0; k < w; ++k) mean[k] += v[k];
      ++count;
    }
  for (double& m : mean) m /= static_cast<double>(count);
  Vector var(w, 0.0);
  for (const auto& seq : data.inputs)
    for (const auto& v : seq)
      for (std::size_t k = 0; k < w; ++k) var[k] += (v[k] - mean[k]) * (v[k] - mean[k]);
  for (auto& seq : data.inputs)
    for (auto& v : seq)
      for (std::size_t k = 0; k < w; ++k) {
        const double sd = std::sqrt(var[k] / static_cast<double>(count));
        v[k] = sd > 0.0 ? (v[k] - mean[k]) / sd : v[k] - mean[k];
      }
}

}  // namespace lp
