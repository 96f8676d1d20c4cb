#include "lp/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "lp/error.hpp"

namespace lp::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "infinity") return INFINITY;
  double out = 0.0;
  const auto* first = v.data();
  if (!v.empty() && v.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key, "expected a number, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

long to_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::vector<std::size_t> to_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_u64(key, trim(item)));
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list");
  return out;
}

// Rethrows parse failures of enum-valued keys under the key actually used.
template <typename F>
auto with_key(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    const auto section = key.substr(0, key.find('.') + 1);
    if (!e.field().empty() && e.field().rfind(section, 0) == 0) throw;
    throw ConfigError(key, e.what());
  }
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"dataset.source",
       [](auto& c, auto& k, auto& v) {
         if (v == "xor") c.dataset.source = DataSource::Xor;
         else if (v == "two_moons") c.dataset.source = DataSource::TwoMoons;
         else if (v == "parity") c.dataset.source = DataSource::Parity;
         else if (v == "csv") c.dataset.source = DataSource::Csv;
         else throw ConfigError(k, "unknown dataset source '" + v + "'");
       }},
      {"dataset.path", [](auto& c, auto&, auto& v) { c.dataset.path = v; }},
      {"dataset.input_cols", [](auto& c, auto& k, auto& v) { c.dataset.csv.input_cols = to_list(k, v); }},
      {"dataset.target_cols", [](auto& c, auto& k, auto& v) { c.dataset.csv.target_cols = to_list(k, v); }},
      {"dataset.one_hot", [](auto& c, auto& k, auto& v) { c.dataset.csv.one_hot = to_u64(k, v); }},
      {"dataset.header", [](auto& c, auto& k, auto& v) { c.dataset.csv.header = to_bool(k, v); }},
      {"dataset.n", [](auto& c, auto& k, auto& v) { c.dataset.n = to_u64(k, v); }},
      {"dataset.noise", [](auto& c, auto& k, auto& v) { c.dataset.noise = to_double(k, v); }},
      {"dataset.seed", [](auto& c, auto& k, auto& v) { c.dataset.seed = to_u64(k, v); }},
      {"dataset.seq_len", [](auto& c, auto& k, auto& v) { c.dataset.seq_len = to_u64(k, v); }},
      {"dataset.standardize", [](auto& c, auto& k, auto& v) { c.dataset.standardize = to_bool(k, v); }},

      {"network.arch", [](auto& c, auto& k, auto& v) { c.arch = with_key(k, [&] { return parse_arch(v); }); }},
      {"network.hidden", [](auto& c, auto& k, auto& v) { c.hidden = to_list(k, v); }},
      {"network.activation",
       [](auto& c, auto& k, auto& v) { c.activation = with_key(k, [&] { return parse_activation(v); }); }},
      {"network.loss", [](auto& c, auto& k, auto& v) { c.loss = with_key(k, [&] { return parse_loss(v); }); }},
      {"network.bias", [](auto& c, auto& k, auto& v) { c.bias = to_bool(k, v); }},
      {"network.supervision",
       [](auto& c, auto& k, auto& v) { c.supervision = with_key(k, [&] { return parse_supervision(v); }); }},

      // constraint.kind and constraint.epsilon are combined after parsing
      {"constraint.kind", [](auto&, auto&, auto&) {}},
      {"constraint.epsilon", [](auto&, auto&, auto&) {}},

      {"train.eta_w", [](auto& c, auto& k, auto& v) { c.train.eta_w = to_double(k, v); }},
      {"train.eta_x", [](auto& c, auto& k, auto& v) { c.train.eta_x = to_double(k, v); }},
      {"train.eta_lambda", [](auto& c, auto& k, auto& v) { c.train.eta_lambda = to_double(k, v); }},
      {"train.max_iters", [](auto& c, auto& k, auto& v) { c.train.max_iters = to_long(k, v); }},
      {"train.target_residual", [](auto& c, auto& k, auto& v) { c.train.target_residual = to_double(k, v); }},
      {"train.seed", [](auto& c, auto& k, auto& v) { c.train.seed = to_u64(k, v); }},
      {"train.log_every", [](auto& c, auto& k, auto& v) { c.train.log_every = to_long(k, v); }},
      {"train.batch_size", [](auto& c, auto& k, auto& v) { c.train.batch_size = to_u64(k, v); }},

      {"reg.rho", [](auto& c, auto& k, auto& v) { c.reg.rho = to_double(k, v); }},
      {"reg.alpha", [](auto& c, auto& k, auto& v) { c.reg.alpha = to_double(k, v); }},

      {"run.workers", [](auto& c, auto& k, auto& v) { c.workers = to_u64(k, v); }},

      {"output.dir", [](auto& c, auto&, auto& v) { c.out_dir = v; }},
      {"output.metrics", [](auto& c, auto&, auto& v) { c.metrics_file = v; }},
      {"output.weights", [](auto& c, auto&, auto& v) { c.weights_file = v; }},

      {"gradcheck.h", [](auto& c, auto& k, auto& v) { c.gradcheck.h = to_double(k, v); }},
      {"gradcheck.h_confirm", [](auto& c, auto& k, auto& v) { c.gradcheck.h_confirm = to_double(k, v); }},
      {"gradcheck.rel_tol", [](auto& c, auto& k, auto& v) { c.gradcheck.rel_tol = to_double(k, v); }},
      {"gradcheck.abs_tol", [](auto& c, auto& k, auto& v) { c.gradcheck.abs_tol = to_double(k, v); }},
      {"gradcheck.kink_margin", [](auto& c, auto& k, auto& v) { c.gradcheck.kink_margin = to_double(k, v); }},
      {"gradcheck.recovery_tol", [](auto& c, auto& k, auto& v) { c.gradcheck.recovery_tol = to_double(k, v); }},
      {"gradcheck.state_scale", [](auto& c, auto& k, auto& v) { c.gradcheck.state_scale = to_double(k, v); }},
      {"gradcheck.max_examples", [](auto& c, auto& k, auto& v) { c.gradcheck.max_examples = to_u64(k, v); }},
      {"gradcheck.corrupt", [](auto& c, auto& k, auto& v) { c.gradcheck.corrupt = to_bool(k, v); }},
  };
  return table;
}

void validate(const ExperimentConfig& c) {
  if (c.dataset.source == DataSource::Csv) {
    if (c.dataset.path.empty()) throw ConfigError("dataset.path", "required for csv datasets");
    if (c.dataset.csv.input_cols.empty()) throw ConfigError("dataset.input_cols", "required for csv datasets");
    if (c.dataset.csv.target_cols.empty()) throw ConfigError("dataset.target_cols", "required for csv datasets");
  }
  if (c.dataset.n == 0) throw ConfigError("dataset.n", "must be >= 1");
  if (c.dataset.seq_len == 0) throw ConfigError("dataset.seq_len", "must be >= 1");
  if (!(c.dataset.noise >= 0.0)) throw ConfigError("dataset.noise", "must be >= 0");
  if (c.hidden.empty()) throw ConfigError("network.hidden", "need at least one hidden layer");
  for (auto w : c.hidden)
    if (w == 0) throw ConfigError("network.hidden", "widths must be positive");
  if (c.workers == 0) throw ConfigError("run.workers", "must be >= 1");
  if (!(c.gradcheck.h > 0.0)) throw ConfigError("gradcheck.h", "must be > 0");
  if (!(c.gradcheck.h_confirm > 0.0)) throw ConfigError("gradcheck.h_confirm", "must be > 0");
  if (c.gradcheck.max_examples == 0) throw ConfigError("gradcheck.max_examples", "must be >= 1");
  c.reg.validate();
  c.train.validate();
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  std::set<std::string> seen;
  std::string section;
  std::string constraint_kind = "identity";
  double epsilon = 0.0;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", "line " + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;

    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(key, "unknown configuration key");
    if (!seen.insert(key).second) throw ConfigError(key, "key given more than once");
    it->second(config, key, value);
    if (key == "constraint.kind") constraint_kind = value;
    if (key == "constraint.epsilon") epsilon = to_double(key, value);
  }
  config.constraint = with_key("constraint.kind", [&] { return ConstraintKind::parse(constraint_kind, epsilon); });
  validate(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Dataset make_dataset(const DatasetConfig& config) {
  Dataset data;
  switch (config.source) {
    case DataSource::Xor: data = gen_xor(); break;
    case DataSource::TwoMoons: data = gen_two_moons(config.n, config.noise, config.seed); break;
    case DataSource::Parity: data = gen_parity_sequences(config.n, config.seq_len, config.seed); break;
    case DataSource::Csv: {
      CsvOptions options = config.csv;
      options.seq_len = config.seq_len;
      data = load_csv(config.path, options);
      break;
    }
  }
  if (config.standardize) standardize(data);
  return data;
}

NetworkSpec resolve_spec(const ExperimentConfig& config, const Dataset& data) {
  NetworkSpec spec;
  spec.arch = config.arch;
  spec.widths.push_back(data.input_width());
  spec.widths.insert(spec.widths.end(), config.hidden.begin(), config.hidden.end());
  spec.output_width = data.target_width();
  spec.activation = config.activation;
  spec.loss = config.loss;
  spec.bias = config.bias;
  spec.supervision = config.supervision;
  spec.seq_len = config.arch == Arch::Rnn ? data.seq_len() : 1;
  if (config.arch != Arch::Rnn && data.seq_len() > 1) {
    throw ConfigError("network.arch", "sequence data needs the rnn architecture");
  }
  if (data.size() > 0 && data.input_width() == 0) throw ConfigError("dataset", "empty input vectors");
  spec.validate();
  return spec;
}

}  // namespace lp::cli
