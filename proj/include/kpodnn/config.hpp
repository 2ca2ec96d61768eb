#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "kpodnn/error.hpp"
#include "kpodnn/reduction.hpp"
#include "kpodnn/training.hpp"
#include "kpodnn/wave_fom.hpp"

namespace kpodnn {

/// Flat `section.key -> raw value` view of a TOML-style file: `[section]`
/// headers, `key = value` lines, `#` comments, quoted strings and
/// single-line arrays.
using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

inline std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

inline double to_double(const std::string& key, const std::string& raw) {
  const std::string v = unquote(trim(raw));
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::InvalidArgument, "'" + key + "' expects a number, got '" + raw + "'");
}

inline long long to_int(const std::string& key, const std::string& raw) {
  const std::string v = unquote(trim(raw));
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used == v.size()) return i;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::InvalidArgument, "'" + key + "' expects an integer, got '" + raw + "'");
}

inline bool to_bool(const std::string& key, const std::string& raw) {
  const std::string v = unquote(trim(raw));
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(ErrorKind::InvalidArgument, "'" + key + "' expects true/false, got '" + raw + "'");
}

inline std::vector<double> to_list(const std::string& key, const std::string& raw) {
  std::string v = trim(raw);
  if (!v.empty() && v.front() == '[') v = v.substr(1);
  if (!v.empty() && v.back() == ']') v.pop_back();
  std::vector<double> out;
  std::stringstream ss(v);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!trim(cell).empty()) out.push_back(to_double(key, cell));
  }
  return out;
}

}  // namespace detail

inline KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    line = detail::trim(detail::strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']', ErrorKind::InvalidArgument, "config line " + std::to_string(lineno) + ": bad section");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::InvalidArgument,
            "config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    kv[section.empty() ? key : section + "." + key] = detail::trim(line.substr(eq + 1));
  }
  return kv;
}

inline KeyValues read_key_values(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str());
}

/// Everything the pipeline needs, with the wave-benchmark defaults.
struct Config {
  // [fom]
  wave::GridSpec grid{4.0 * std::numbers::pi, 52.0, 256, 0};  // time_steps 0 = smallest stable
  double speed = 1.0;
  int stored_intervals = 100;  // N_t: stored levels per trajectory minus one

  // [sampling]
  int per_axis = 5;
  std::array<double, 2> amplitude_range{0.5, 1.0};
  std::array<double, 2> center_range{0.0, 0.0};  // 0,0 = [L/3, 2L/3]
  std::array<double, 2> width_range{0.5, 1.0};
  // Explicit axis values replace the LHS draw on that axis.
  std::vector<double> amplitude_values;
  std::vector<double> center_values;
  std::vector<double> width_values;
  std::vector<std::array<double, 3>> test_params{{0.75, 8.0, 0.9}};
  bool input_scaling = true;

  // [reduction]
  ReductionMethod method = ReductionMethod::Kpod;
  double gamma = 1e-10;
  double eps_hat = 1e-12;

  // [nn]
  nn::TrainConfig train;
  double depth_base = 10.0;
  bool cross_validate = false;  // K-fold choice between 1 and ceil(log_B n) hidden layers

  // [run]
  std::uint64_t seed = 42;
  std::string snapshots;       // ingest a SNAP1 building set instead of running the FOM
  std::string test_snapshots;  // ingest a SNAP1 test set
  std::string output_dir = ".";

  std::array<double, 2> center_bounds() const {
    if (center_range[0] == 0.0 && center_range[1] == 0.0) return {grid.length / 3.0, 2.0 * grid.length / 3.0};
    return center_range;
  }

  /// Time steps actually used: explicit value, or the smallest stable count
  /// that is a multiple of stored_intervals.
  wave::GridSpec resolved_grid() const {
    wave::GridSpec g = grid;
    if (g.time_steps <= 0) {
      g.time_steps = wave::GridSpec::stable_time_steps(g.length, g.final_time, g.intervals, speed, stored_intervals);
    }
    return g;
  }

  int stride() const {
    const auto g = resolved_grid();
    require(stored_intervals >= 1 && g.time_steps % stored_intervals == 0, ErrorKind::InvalidArgument,
            "fom.time_steps (" + std::to_string(g.time_steps) + ") must be a multiple of fom.stored_intervals (" +
                std::to_string(stored_intervals) + ")");
    return g.time_steps / stored_intervals;
  }

  void set(const std::string& key, const std::string& raw) {
    using namespace detail;
    auto range = [&](std::array<double, 2>& r) {
      const auto v = to_list(key, raw);
      require(v.size() == 2, ErrorKind::InvalidArgument, "'" + key + "' expects [low, high]");
      r = {v[0], v[1]};
    };
    if (key == "fom.length") grid.length = to_double(key, raw);
    else if (key == "fom.final_time") grid.final_time = to_double(key, raw);
    else if (key == "fom.intervals") grid.intervals = static_cast<int>(to_int(key, raw));
    else if (key == "fom.time_steps") grid.time_steps = static_cast<int>(to_int(key, raw));
    else if (key == "fom.speed") speed = to_double(key, raw);
    else if (key == "fom.stored_intervals") stored_intervals = static_cast<int>(to_int(key, raw));
    else if (key == "sampling.per_axis") per_axis = static_cast<int>(to_int(key, raw));
    else if (key == "sampling.amplitude") range(amplitude_range);
    else if (key == "sampling.center") range(center_range);
    else if (key == "sampling.width") range(width_range);
    else if (key == "sampling.amplitude_values") amplitude_values = to_list(key, raw);
    else if (key == "sampling.center_values") center_values = to_list(key, raw);
    else if (key == "sampling.width_values") width_values = to_list(key, raw);
    else if (key == "sampling.test_params") {
      const auto v = to_list(key, raw);
      require(!v.empty() && v.size() % 3 == 0, ErrorKind::InvalidArgument,
              "'" + key + "' expects a flat list of (A0, x0, sigma) triples");
      test_params.clear();
      for (std::size_t i = 0; i < v.size(); i += 3) test_params.push_back({v[i], v[i + 1], v[i + 2]});
    } else if (key == "sampling.input_scaling") input_scaling = to_bool(key, raw);
    else if (key == "reduction.method") method = method_from_string(unquote(trim(raw)));
    else if (key == "reduction.gamma") gamma = to_double(key, raw);
    else if (key == "reduction.eps_hat") eps_hat = to_double(key, raw);
    else if (key == "nn.epochs") train.epochs = static_cast<int>(to_int(key, raw));
    else if (key == "nn.batch_size") train.batch_size = static_cast<int>(to_int(key, raw));
    else if (key == "nn.lr") train.adam.lr = to_double(key, raw);
    else if (key == "nn.beta1") train.adam.beta1 = to_double(key, raw);
    else if (key == "nn.beta2") train.adam.beta2 = to_double(key, raw);
    else if (key == "nn.epsilon") train.adam.epsilon = to_double(key, raw);
    else if (key == "nn.amsgrad") train.adam.amsgrad = to_bool(key, raw);
    else if (key == "nn.theta") train.theta = to_double(key, raw);
    else if (key == "nn.kfold") train.kfold = static_cast<int>(to_int(key, raw));
    else if (key == "nn.depth_base") depth_base = trim(raw) == "e" ? std::numbers::e : to_double(key, raw);
    else if (key == "nn.cross_validate") cross_validate = to_bool(key, raw);
    else if (key == "nn.decay_factor") train.decay_factor = to_double(key, raw);
    else if (key == "nn.decay_every") train.decay_every = static_cast<int>(to_int(key, raw));
    else if (key == "run.seed") seed = static_cast<std::uint64_t>(to_int(key, raw));
    else if (key == "run.snapshots") snapshots = unquote(trim(raw));
    else if (key == "run.test_snapshots") test_snapshots = unquote(trim(raw));
    else if (key == "run.output_dir") output_dir = unquote(trim(raw));
    else fail(ErrorKind::InvalidArgument, "unknown config key '" + key + "'");
  }

  void apply(const KeyValues& kv) {
    for (const auto& [k, v] : kv) set(k, v);
  }

  void validate() const {
    resolved_grid().validate();
    require(per_axis >= 1, ErrorKind::InvalidArgument, "sampling.per_axis must be >= 1");
    require(gamma > 0.0, ErrorKind::InvalidArgument, "reduction.gamma must be positive");
    require(eps_hat > 0.0, ErrorKind::InvalidArgument, "reduction.eps_hat must be positive");
    require(depth_base > 1.0, ErrorKind::InvalidArgument, "nn.depth_base must be > 1");
    train.validate();
  }
};

}  // namespace kpodnn
