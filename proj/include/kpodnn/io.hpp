#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "kpodnn/error.hpp"
#include "kpodnn/network.hpp"
#include "kpodnn/reduction.hpp"
#include "kpodnn/sampling.hpp"
#include "kpodnn/snapshots.hpp"
#include "kpodnn/training.hpp"
#include "kpodnn/wave_fom.hpp"

namespace kpodnn::io {

using nlohmann::json;

/// Shortest round-trip decimal form of a double, used for every CSV cell.
inline std::string fmt(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace detail {

inline void write_doubles_le(std::ostream& out, const double* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      auto bits = std::bit_cast<std::uint64_t>(data[i]);
      char bytes[8];
      for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
      out.write(bytes, 8);
    }
  }
}

inline void read_doubles_le(std::istream& in, double* data, std::size_t count, const std::string& what) {
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < count && in; ++i) {
      unsigned char bytes[8];
      in.read(reinterpret_cast<char*>(bytes), 8);
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
      data[i] = std::bit_cast<double>(bits);
    }
  }
  require(static_cast<bool>(in), ErrorKind::Format, what + ": payload truncated");
}

inline std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path + "' for writing");
  return out;
}

inline std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open '" + path + "' for reading");
  return in;
}

inline void write_header(std::ostream& out, const std::string& magic, const json& header) {
  out << magic << '\n' << header.dump() << '\n';
}

inline json read_header(std::istream& in, const std::string& magic, const std::string& path) {
  std::string line;
  std::getline(in, line);
  require(line == magic, ErrorKind::Format, "'" + path + "' is not a " + magic + " file");
  std::getline(in, line);
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, "'" + path + "': bad JSON header: " + e.what());
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& path) {
  require(j.contains(key), ErrorKind::Format, "'" + path + "': header lacks '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, "'" + path + "': bad '" + key + "': " + e.what());
  }
}

inline std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline Eigen::VectorXd from_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// SNAP1 snapshot files

inline void write_snapshots(std::ostream& out, const SnapshotMatrix& s) {
  json labels = json::array();
  for (const auto& l : s.labels) {
    json row = json::array({l.t});
    for (double v : l.mu) row.push_back(v);
    labels.push_back(std::move(row));
  }
  const json header = {{"N_h", s.dofs()},
                       {"N_s", s.size()},
                       {"m", s.param_dim()},
                       {"origin", to_string(s.origin)},
                       {"column_labels", std::move(labels)}};
  detail::write_header(out, "SNAP1", header);
  detail::write_doubles_le(out, s.data.data(), static_cast<std::size_t>(s.data.size()));
}

inline void write_snapshots(const std::string& path, const SnapshotMatrix& s) {
  auto out = detail::open_out(path, true);
  write_snapshots(out, s);
  require(static_cast<bool>(out), ErrorKind::Io, "write to '" + path + "' failed");
}

inline SnapshotMatrix read_snapshots(std::istream& in, const std::string& path = "<stream>") {
  const json h = detail::read_header(in, "SNAP1", path);
  const auto nh = detail::get<Eigen::Index>(h, "N_h", path);
  const auto ns = detail::get<Eigen::Index>(h, "N_s", path);
  const auto m = detail::get<std::size_t>(h, "m", path);
  require(nh >= 0 && ns >= 0, ErrorKind::Format, "'" + path + "': negative dimensions");
  SnapshotMatrix s;
  s.origin = origin_from_string(detail::get<std::string>(h, "origin", path));
  const auto labels = detail::get<std::vector<std::vector<double>>>(h, "column_labels", path);
  require(static_cast<Eigen::Index>(labels.size()) == ns, ErrorKind::Format,
          "'" + path + "': column_labels count differs from N_s");
  for (const auto& row : labels) {
    require(row.size() == m + 1, ErrorKind::Format, "'" + path + "': label length differs from m + 1");
    s.labels.push_back({row[0], std::vector<double>(row.begin() + 1, row.end())});
  }
  s.data.resize(nh, ns);
  detail::read_doubles_le(in, s.data.data(), static_cast<std::size_t>(nh * ns), path);
  s.validate();
  return s;
}

inline SnapshotMatrix read_snapshots(const std::string& path) {
  auto in = detail::open_in(path, true);
  return read_snapshots(in, path);
}

/// CSV variant: a header row with one `t;mu_1;...;mu_m` label per column,
/// then N_h rows of N_s values.
inline void write_snapshots_csv(const std::string& path, const SnapshotMatrix& s) {
  auto out = detail::open_out(path, false);
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    const auto& l = s.labels[static_cast<std::size_t>(j)];
    if (j) out << ',';
    out << fmt(l.t);
    for (double v : l.mu) out << ';' << fmt(v);
  }
  out << '\n';
  for (Eigen::Index i = 0; i < s.dofs(); ++i) {
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      if (j) out << ',';
      out << fmt(s.data(i, j));
    }
    out << '\n';
  }
}

inline SnapshotMatrix read_snapshots_csv(const std::string& path, SnapshotOrigin origin = SnapshotOrigin::Ingested) {
  auto in = detail::open_in(path, false);
  auto split = [](const std::string& line, char sep) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, sep)) cells.push_back(cell);
    return cells;
  };
  auto number = [&](const std::string& cell) {
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      return v;
    } catch (const std::exception&) {
      fail(ErrorKind::Format, "'" + path + "': bad number '" + cell + "'");
    }
  };
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::Format, "'" + path + "': empty CSV");
  SnapshotMatrix s;
  s.origin = origin;
  for (const auto& cell : split(line, ',')) {
    const auto parts = split(cell, ';');
    require(!parts.empty(), ErrorKind::Format, "'" + path + "': empty column label");
    ColumnLabel l{number(parts[0]), {}};
    for (std::size_t p = 1; p < parts.size(); ++p) l.mu.push_back(number(parts[p]));
    s.labels.push_back(std::move(l));
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line, ',')) row.push_back(number(cell));
    require(row.size() == s.labels.size(), ErrorKind::Format, "'" + path + "': ragged CSV row");
    rows.push_back(std::move(row));
  }
  s.data.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(s.labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      s.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  s.validate();
  return s;
}

/// Trajectory dump: rows are grid nodes, columns are stored times.
inline void write_trajectory_csv(const std::string& path, const wave::Trajectory& tr) {
  auto out = detail::open_out(path, false);
  for (Eigen::Index j = 0; j < tr.times.size(); ++j) out << (j ? "," : "") << "t=" << fmt(tr.times[j]);
  out << '\n';
  for (Eigen::Index i = 0; i < tr.states.rows(); ++i) {
    for (Eigen::Index j = 0; j < tr.states.cols(); ++j) out << (j ? "," : "") << fmt(tr.states(i, j));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// RB1 basis files

inline void write_basis(std::ostream& out, const ReducedBasis& b) {
  json header = {{"N_h", b.dofs()},
                 {"n", b.n()},
                 {"method", to_string(b.method)},
                 {"eps_hat", b.eps_hat},
                 {"sigmas", detail::to_vector(b.spectrum.sigmas)},
                 {"discarded_count", b.spectrum.discarded_count},
                 {"criterion_rank", b.criterion_rank}};
  if (b.gamma) header["gamma"] = *b.gamma;
  detail::write_header(out, "RB1", header);
  detail::write_doubles_le(out, b.v.data(), static_cast<std::size_t>(b.v.size()));
}

inline void write_basis(const std::string& path, const ReducedBasis& b) {
  auto out = detail::open_out(path, true);
  write_basis(out, b);
  require(static_cast<bool>(out), ErrorKind::Io, "write to '" + path + "' failed");
}

inline ReducedBasis read_basis(std::istream& in, const std::string& path = "<stream>") {
  const json h = detail::read_header(in, "RB1", path);
  ReducedBasis b;
  const auto nh = detail::get<Eigen::Index>(h, "N_h", path);
  const auto n = detail::get<Eigen::Index>(h, "n", path);
  b.method = method_from_string(detail::get<std::string>(h, "method", path));
  b.eps_hat = detail::get<double>(h, "eps_hat", path);
  b.spectrum.sigmas = detail::from_vector(detail::get<std::vector<double>>(h, "sigmas", path));
  b.spectrum.discarded_count = h.value("discarded_count", Eigen::Index{0});
  b.criterion_rank = h.value("criterion_rank", n);
  if (h.contains("gamma")) b.gamma = h.at("gamma").get<double>();
  require((b.method == ReductionMethod::Kpod) == b.gamma.has_value(), ErrorKind::Format,
          "'" + path + "': gamma must be present exactly for KPOD bases");
  b.v.resize(nh, n);
  detail::read_doubles_le(in, b.v.data(), static_cast<std::size_t>(nh * n), path);
  return b;
}

inline ReducedBasis read_basis(const std::string& path) {
  auto in = detail::open_in(path, true);
  return read_basis(in, path);
}

// ---------------------------------------------------------------------------
// NN1 network files

inline json to_json(const nn::NetworkSpec& s) {
  return {{"input_dim", s.input_dim},
          {"hidden_count", s.hidden_count},
          {"hidden_width", s.hidden_width},
          {"output_dim", s.output_dim},
          {"depth_base", s.depth_base}};
}

inline json to_json(const nn::TrainConfig& c) {
  return {{"epochs", c.epochs},         {"batch_size", c.batch_size}, {"lr", c.adam.lr},
          {"beta1", c.adam.beta1},      {"beta2", c.adam.beta2},      {"epsilon", c.adam.epsilon},
          {"amsgrad", c.adam.amsgrad},  {"theta", c.theta},           {"seed", c.seed},
          {"kfold", c.kfold},           {"decay_factor", c.decay_factor}, {"decay_every", c.decay_every}};
}

inline nn::TrainConfig train_config_from_json(const json& j) {
  nn::TrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.adam.lr = j.value("lr", c.adam.lr);
  c.adam.beta1 = j.value("beta1", c.adam.beta1);
  c.adam.beta2 = j.value("beta2", c.adam.beta2);
  c.adam.epsilon = j.value("epsilon", c.adam.epsilon);
  c.adam.amsgrad = j.value("amsgrad", c.adam.amsgrad);
  c.theta = j.value("theta", c.theta);
  c.seed = j.value("seed", c.seed);
  c.kfold = j.value("kfold", c.kfold);
  c.decay_factor = j.value("decay_factor", c.decay_factor);
  c.decay_every = j.value("decay_every", c.decay_every);
  return c;
}

/// Network plus what the online stage needs to feed it.
struct NetworkFile {
  nn::Network net;
  Normalization normalization;
  nn::TrainConfig train_config;
  std::uint64_t seed = 0;
};

inline void write_network(std::ostream& out, const NetworkFile& f) {
  const json header = {{"spec", to_json(f.net.spec)},
                       {"seed", f.seed},
                       {"train_config", to_json(f.train_config)},
                       {"input_normalization",
                        {{"offset", detail::to_vector(f.normalization.offset)},
                         {"scale", detail::to_vector(f.normalization.scale)}}}};
  detail::write_header(out, "NN1", header);
  const Eigen::VectorXd p = f.net.parameters();
  detail::write_doubles_le(out, p.data(), static_cast<std::size_t>(p.size()));
}

inline void write_network(const std::string& path, const NetworkFile& f) {
  auto out = detail::open_out(path, true);
  write_network(out, f);
  require(static_cast<bool>(out), ErrorKind::Io, "write to '" + path + "' failed");
}

inline NetworkFile read_network(std::istream& in, const std::string& path = "<stream>") {
  const json h = detail::read_header(in, "NN1", path);
  const json js = detail::get<json>(h, "spec", path);
  nn::NetworkSpec spec;
  spec.input_dim = detail::get<int>(js, "input_dim", path);
  spec.hidden_count = detail::get<int>(js, "hidden_count", path);
  spec.hidden_width = detail::get<int>(js, "hidden_width", path);
  spec.output_dim = detail::get<int>(js, "output_dim", path);
  spec.depth_base = js.value("depth_base", 10.0);
  NetworkFile f;
  f.net = nn::make_network(spec);
  f.seed = h.value("seed", std::uint64_t{0});
  f.train_config = train_config_from_json(h.value("train_config", json::object()));
  const json jn = detail::get<json>(h, "input_normalization", path);
  f.normalization.offset = detail::from_vector(detail::get<std::vector<double>>(jn, "offset", path));
  f.normalization.scale = detail::from_vector(detail::get<std::vector<double>>(jn, "scale", path));
  require(f.normalization.dim() == spec.input_dim && f.normalization.scale.size() == spec.input_dim,
          ErrorKind::Format, "'" + path + "': normalization size differs from input_dim");
  Eigen::VectorXd p(f.net.parameter_size());
  detail::read_doubles_le(in, p.data(), static_cast<std::size_t>(p.size()), path);
  f.net.set_parameters(p);
  return f;
}

inline NetworkFile read_network(const std::string& path) {
  auto in = detail::open_in(path, true);
  return read_network(in, path);
}

// ---------------------------------------------------------------------------
// CSV tables

inline void write_spectrum_csv(std::ostream& out, const std::vector<SpectrumRow>& rows) {
  out << "k,sigma_sq,method,gamma\n";
  for (const auto& r : rows) {
    out << r.k << ',' << fmt(r.sigma_sq) << ',' << to_string(r.method) << ',' << (r.gamma ? fmt(*r.gamma) : "")
        << '\n';
  }
}

inline void write_spectrum_csv(const std::string& path, const std::vector<SpectrumRow>& rows) {
  auto out = detail::open_out(path, false);
  write_spectrum_csv(out, rows);
}

inline void write_history_csv(const std::string& path, const nn::TrainReport& r) {
  auto out = detail::open_out(path, false);
  out << "epoch,train_loss,val_loss,seconds\n";
  for (std::size_t e = 0; e < r.train_loss.size(); ++e) {
    out << (e + 1) << ',' << fmt(r.train_loss[e]) << ',' << (e < r.val_loss.size() ? fmt(r.val_loss[e]) : "")
        << ',' << fmt(r.epoch_seconds[e]) << '\n';
  }
}

}  // namespace kpodnn::io
