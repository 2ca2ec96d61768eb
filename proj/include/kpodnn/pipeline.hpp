#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "kpodnn/config.hpp"
#include "kpodnn/error.hpp"
#include "kpodnn/io.hpp"
#include "kpodnn/network.hpp"
#include "kpodnn/random.hpp"
#include "kpodnn/reduction.hpp"
#include "kpodnn/sampling.hpp"
#include "kpodnn/snapshots.hpp"
#include "kpodnn/training.hpp"
#include "kpodnn/wave_fom.hpp"

namespace kpodnn {

using json = nlohmann::json;

namespace detail {

/// Runs `f`, prefixing any library error with the stage name.
template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.annotated(name);
  }
}

inline std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void fnv1a(std::uint64_t& h, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

/// 64-bit FNV-1a over the snapshot values and column labels, as hex.
inline std::string snapshot_hash(const SnapshotMatrix& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const std::int64_t shape[2] = {s.dofs(), s.size()};
  detail::fnv1a(h, shape, sizeof shape);
  detail::fnv1a(h, s.data.data(), sizeof(double) * static_cast<std::size_t>(s.data.size()));
  for (const auto& l : s.labels) {
    detail::fnv1a(h, &l.t, sizeof l.t);
    detail::fnv1a(h, l.mu.data(), sizeof(double) * l.mu.size());
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline json to_json(const Config& c) {
  const auto g = c.resolved_grid();
  json tests = json::array();
  for (const auto& p : c.test_params) tests.push_back({p[0], p[1], p[2]});
  return {{"fom",
           {{"length", g.length},
            {"final_time", g.final_time},
            {"intervals", g.intervals},
            {"time_steps", g.time_steps},
            {"speed", c.speed},
            {"stored_intervals", c.stored_intervals}}},
          {"sampling",
           {{"per_axis", c.per_axis},
            {"amplitude", c.amplitude_range},
            {"center", c.center_bounds()},
            {"width", c.width_range},
            {"amplitude_values", c.amplitude_values},
            {"center_values", c.center_values},
            {"width_values", c.width_values},
            {"test_params", tests},
            {"input_scaling", c.input_scaling}}},
          {"reduction", {{"method", to_string(c.method)}, {"gamma", c.gamma}, {"eps_hat", c.eps_hat}}},
          {"nn", {{"train", io::to_json(c.train)}, {"depth_base", c.depth_base}, {"cross_validate", c.cross_validate}}},
          {"run", {{"seed", c.seed}, {"snapshots", c.snapshots}, {"test_snapshots", c.test_snapshots}}}};
}

struct Provenance {
  std::string snapshot_hash;
  std::string snapshot_source;  // "generated" or the ingested path
  json config = json::object();
  std::uint64_t seed = 0;
  std::uint64_t init_seed = 0;
  std::uint64_t shuffle_seed = 0;
  std::string started_at;
  std::string finished_at;
  double basis_seconds = 0.0;
  double train_seconds = 0.0;
};

inline json to_json(const Provenance& p) {
  return {{"snapshot_hash", p.snapshot_hash}, {"snapshot_source", p.snapshot_source},
          {"config", p.config},               {"seed", p.seed},
          {"init_seed", p.init_seed},         {"shuffle_seed", p.shuffle_seed},
          {"started_at", p.started_at},       {"finished_at", p.finished_at},
          {"basis_seconds", p.basis_seconds}, {"train_seconds", p.train_seconds}};
}

inline Provenance provenance_from_json(const json& j) {
  Provenance p;
  p.snapshot_hash = j.value("snapshot_hash", "");
  p.snapshot_source = j.value("snapshot_source", "");
  p.config = j.value("config", json::object());
  p.seed = j.value("seed", std::uint64_t{0});
  p.init_seed = j.value("init_seed", std::uint64_t{0});
  p.shuffle_seed = j.value("shuffle_seed", std::uint64_t{0});
  p.started_at = j.value("started_at", "");
  p.finished_at = j.value("finished_at", "");
  p.basis_seconds = j.value("basis_seconds", 0.0);
  p.train_seconds = j.value("train_seconds", 0.0);
  return p;
}

/// Everything the online stage needs. Holds no snapshot data.
struct RomModel {
  ReducedBasis basis;
  nn::Network net;
  Normalization normalization;
  nn::TrainConfig train_config;
  Provenance provenance;
  nn::TrainReport report;  // build-time history, not persisted

  Eigen::Index param_dim() const { return net.spec.input_dim - 1; }

  void validate() const {
    require(net.spec.output_dim == basis.n(), ErrorKind::DimensionMismatch,
            "network output size differs from the basis dimension");
    require(normalization.dim() == net.spec.input_dim, ErrorKind::DimensionMismatch,
            "input normalization size differs from the network input");
  }
};

inline void save_model(const std::string& dir, const RomModel& model) {
  model.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorKind::Io, "cannot create '" + dir + "': " + ec.message());
  const std::filesystem::path root(dir);
  io::write_basis((root / "basis.rb1").string(), model.basis);
  io::write_network((root / "network.nn1").string(),
                    {model.net, model.normalization, model.train_config, model.provenance.init_seed});
  std::ofstream out(root / "provenance.json");
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write provenance in '" + dir + "'");
  out << to_json(model.provenance).dump(2) << '\n';
}

inline RomModel load_model(const std::string& dir) {
  const std::filesystem::path root(dir);
  RomModel model;
  model.basis = io::read_basis((root / "basis.rb1").string());
  auto nf = io::read_network((root / "network.nn1").string());
  model.net = std::move(nf.net);
  model.normalization = std::move(nf.normalization);
  model.train_config = nf.train_config;
  std::ifstream in(root / "provenance.json");
  if (in) {
    try {
      model.provenance = provenance_from_json(json::parse(in));
    } catch (const json::exception& e) {
      fail(ErrorKind::Format, "'" + (root / "provenance.json").string() + "': " + e.what());
    }
  }
  model.validate();
  return model;
}

// ---------------------------------------------------------------------------
// Snapshot sources

inline ParameterBox wave_box(const Config& cfg) {
  const auto c = cfg.center_bounds();
  return {{"A0", "x0", "sigma"},
          {cfg.amplitude_range[0], c[0], cfg.width_range[0]},
          {cfg.amplitude_range[1], c[1], cfg.width_range[1]}};
}

/// FOM trajectories at the given (A0, x0, sigma) triples, stored levels only.
inline SnapshotMatrix solve_triples(const Config& cfg, const std::vector<std::array<double, 3>>& triples) {
  const auto grid = cfg.resolved_grid();
  const int stride = cfg.stride();
  std::vector<wave::Trajectory> runs;
  runs.reserve(triples.size());
  for (const auto& p : triples) {
    wave::WaveParams params{p[0], p[1], p[2], cfg.speed};
    runs.push_back(wave::solve_wave(params, grid, stride));
  }
  return assemble_snapshots(runs);
}

/// Per-axis building values: explicit lists where given, LHS draws elsewhere.
inline std::vector<std::vector<double>> building_axes(const Config& cfg) {
  auto axes = latin_hypercube_axes(wave_box(cfg), static_cast<std::size_t>(cfg.per_axis), stage_seed(cfg.seed, "lhs"));
  const std::vector<double>* fixed[3] = {&cfg.amplitude_values, &cfg.center_values, &cfg.width_values};
  for (std::size_t d = 0; d < 3; ++d) {
    if (!fixed[d]->empty()) axes[d] = *fixed[d];
  }
  return axes;
}

/// Tensor product of the building axes, one trajectory per triple.
inline SnapshotMatrix generate_building_set(const Config& cfg) {
  return detail::stage("fom", [&] {
    cfg.validate();
    const auto points = tensor_product(building_axes(cfg));
    std::vector<std::array<double, 3>> triples;
    triples.reserve(points.size());
    for (const auto& p : points) triples.push_back({p[0], p[1], p[2]});
    return solve_triples(cfg, triples);
  });
}

inline SnapshotMatrix generate_test_set(const Config& cfg) {
  return detail::stage("fom", [&] {
    cfg.validate();
    return solve_triples(cfg, cfg.test_params);
  });
}

inline SnapshotMatrix read_snapshot_file(const std::string& path) {
  const bool csv = std::filesystem::path(path).extension() == ".csv";
  SnapshotMatrix s = csv ? io::read_snapshots_csv(path) : io::read_snapshots(path);
  s.origin = SnapshotOrigin::Ingested;
  return s;
}

inline SnapshotMatrix building_snapshots(const Config& cfg) {
  if (!cfg.snapshots.empty()) return detail::stage("ingest", [&] { return read_snapshot_file(cfg.snapshots); });
  return generate_building_set(cfg);
}

inline SnapshotMatrix test_snapshots(const Config& cfg) {
  if (!cfg.test_snapshots.empty()) {
    return detail::stage("ingest", [&] { return read_snapshot_file(cfg.test_snapshots); });
  }
  return generate_test_set(cfg);
}

// ---------------------------------------------------------------------------
// Offline / online

/// Called after every training epoch with the model as built so far.
using BuildCallback = std::function<void(int epoch, const RomModel& partial)>;

/// Regression pairs -> trained network, on a basis built beforehand.
inline RomModel train_on_basis(const Config& cfg, const SnapshotMatrix& snaps, ReducedBasis basis,
                               const BuildCallback& on_epoch = {}) {
  detail::stage("config", [&] { cfg.validate(); });
  detail::stage("io-pairs", [&] {
    snaps.validate();
    require(basis.v.rows() == snaps.dofs(), ErrorKind::DimensionMismatch,
            "basis has " + std::to_string(basis.v.rows()) + " rows, snapshots have " + std::to_string(snaps.dofs()));
  });
  RomModel model;
  model.basis = std::move(basis);
  auto& prov = model.provenance;
  prov.started_at = detail::utc_now();
  prov.snapshot_hash = snapshot_hash(snaps);
  prov.snapshot_source = snaps.origin == SnapshotOrigin::Ingested && !cfg.snapshots.empty() ? cfg.snapshots
                                                                                           : to_string(snaps.origin);
  prov.config = to_json(cfg);
  prov.seed = cfg.seed;
  prov.init_seed = stage_seed(cfg.seed, "init");
  prov.shuffle_seed = stage_seed(cfg.seed, "shuffle");

  const Dataset data = detail::stage("io-pairs", [&] { return build_io_pairs(snaps, model.basis, cfg.input_scaling); });
  model.normalization = data.normalization;

  const int m = static_cast<int>(snaps.param_dim());
  const int n = static_cast<int>(model.basis.n());
  nn::TrainConfig tc = cfg.train;
  tc.seed = prov.shuffle_seed;
  model.train_config = tc;

  const auto clock = std::chrono::steady_clock::now();
  nn::NetworkSpec spec = nn::architecture_for(m, n, cfg.depth_base);
  std::optional<double> e_gen;
  if (cfg.cross_validate) {
    std::vector<nn::NetworkSpec> candidates{spec};
    nn::NetworkSpec shallow = spec;
    shallow.hidden_count = 1;
    if (!(shallow == spec)) candidates.insert(candidates.begin(), shallow);
    nn::TrainConfig cv_cfg = tc;
    cv_cfg.seed = stage_seed(cfg.seed, "cv");
    const auto cv = detail::stage("cross-validation", [&] { return nn::cross_validate(data, candidates, cv_cfg); });
    spec = candidates[cv.best];
    e_gen = cv.generalization_error[cv.best];
  }
  model.net = nn::init_glorot(spec, prov.init_seed);
  nn::EpochCallback hook;
  if (on_epoch) hook = [&](int epoch, const nn::Network&) { on_epoch(epoch, model); };
  model.report = detail::stage("training", [&] { return nn::train(model.net, data, tc, hook); });
  model.report.generalization_error = e_gen;
  prov.train_seconds = detail::seconds_since(clock);
  prov.finished_at = detail::utc_now();
  return model;
}

/// Snapshots -> basis -> regression pairs -> trained network.
inline RomModel offline(const Config& cfg, const SnapshotMatrix& snaps, const BuildCallback& on_epoch = {}) {
  detail::stage("config", [&] { cfg.validate(); });
  const std::string started_at = detail::utc_now();
  const auto clock = std::chrono::steady_clock::now();
  ReducedBasis basis = detail::stage("reduction", [&] {
    snaps.validate();
    return build_basis(snaps, cfg.method, cfg.gamma, cfg.eps_hat);
  });
  const double basis_seconds = detail::seconds_since(clock);
  RomModel model = train_on_basis(cfg, snaps, std::move(basis), on_epoch);
  model.provenance.basis_seconds = basis_seconds;
  model.provenance.started_at = started_at;
  return model;
}

inline RomModel offline(const Config& cfg) { return offline(cfg, building_snapshots(cfg)); }

/// Reduced coefficients Phi_NN for raw (t, mu) rows.
inline Eigen::MatrixXd predict_coefficients(const RomModel& model, const Eigen::MatrixXd& raw_inputs) {
  require(raw_inputs.cols() == model.net.spec.input_dim, ErrorKind::DimensionMismatch,
          "query has " + std::to_string(raw_inputs.cols() - 1) + " parameters, model expects " +
              std::to_string(model.param_dim()));
  return nn::forward(model.net, model.normalization.apply(raw_inputs));
}

/// u_h^NN(t; mu) = V Phi_NN(normalized(t; mu)). Queries outside the training
/// box append a warning instead of failing.
inline Eigen::VectorXd online(const RomModel& model, double t, const std::vector<double>& mu,
                              std::vector<std::string>* warnings = nullptr) {
  require(static_cast<Eigen::Index>(mu.size()) == model.param_dim(), ErrorKind::DimensionMismatch,
          "query has " + std::to_string(mu.size()) + " parameters, model expects " +
              std::to_string(model.param_dim()));
  Eigen::VectorXd raw(model.net.spec.input_dim);
  raw[0] = t;
  for (std::size_t i = 0; i < mu.size(); ++i) raw[static_cast<Eigen::Index>(i) + 1] = mu[i];
  if (warnings && !model.normalization.contains(raw)) {
    warnings->push_back("query (t = " + io::fmt(t) + ") lies outside the training box");
  }
  const Eigen::MatrixXd coeffs = predict_coefficients(model, raw.transpose());
  return model.basis.v * coeffs.row(0).transpose();
}

struct SampleError {
  double t = 0.0;
  std::vector<double> mu;
  double eps = 0.0;
};

struct EvalReport {
  std::vector<SampleError> samples;
  double eps_bar = 0.0;
  std::size_t excluded_zero_norm = 0;
  Eigen::Index n = 0;
  ReductionMethod method = ReductionMethod::Kpod;
  double train_seconds = 0.0;
  std::int64_t parameter_count = 0;
};

/// eps = ||u_h - V Phi_NN(t; mu)|| / ||u_h|| per column, eps_bar their mean.
/// Zero-norm columns are skipped and counted.
inline EvalReport evaluate(const RomModel& model, const SnapshotMatrix& test) {
  return detail::stage("evaluate", [&] {
    test.validate();
    require(test.dofs() == model.basis.dofs(), ErrorKind::DimensionMismatch,
            "test snapshots have N_h = " + std::to_string(test.dofs()) + ", model has " +
                std::to_string(model.basis.dofs()));
    require(static_cast<Eigen::Index>(test.param_dim()) == model.param_dim(), ErrorKind::DimensionMismatch,
            "test snapshots have m = " + std::to_string(test.param_dim()) + ", model expects " +
                std::to_string(model.param_dim()));
    EvalReport r;
    r.n = model.basis.n();
    r.method = model.basis.method;
    r.train_seconds = model.provenance.train_seconds;
    r.parameter_count = nn::parameter_count(model.net.spec);

    const Eigen::MatrixXd recon = model.basis.v * predict_coefficients(model, label_inputs(test)).transpose();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < test.size(); ++j) {
      const double norm = test.data.col(j).norm();
      if (norm == 0.0) {
        ++r.excluded_zero_norm;
        continue;
      }
      const auto& l = test.labels[static_cast<std::size_t>(j)];
      const double eps = (test.data.col(j) - recon.col(j)).norm() / norm;
      r.samples.push_back({l.t, l.mu, eps});
      sum += eps;
    }
    require(!r.samples.empty(), ErrorKind::ZeroTargetNorm, "every test snapshot has zero norm");
    r.eps_bar = sum / static_cast<double>(r.samples.size());
    return r;
  });
}

inline void write_eval_csv(const std::string& path, const EvalReport& r) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << 't';
  const std::size_t m = r.samples.empty() ? 0 : r.samples.front().mu.size();
  for (std::size_t p = 0; p < m; ++p) out << ",mu" << (p + 1);
  out << ",eps\n";
  for (const auto& s : r.samples) {
    out << io::fmt(s.t);
    for (double v : s.mu) out << ',' << io::fmt(v);
    out << ',' << io::fmt(s.eps) << '\n';
  }
}

inline void write_eval_summary_csv(const std::string& path, const EvalReport& r) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << "method,n,parameter_count,eps_bar,samples,excluded_zero_norm,train_seconds\n";
  out << to_string(r.method) << ',' << r.n << ',' << r.parameter_count << ',' << io::fmt(r.eps_bar) << ','
      << r.samples.size() << ',' << r.excluded_zero_norm << ',' << io::fmt(r.train_seconds) << '\n';
}

// ---------------------------------------------------------------------------
// Studies

struct CompareRow {
  ReductionMethod method = ReductionMethod::Kpod;
  Eigen::Index n = 0;
  std::int64_t parameter_count = 0;
  int epochs = 0;
  double eps_bar = 0.0;
  double train_seconds = 0.0;
  double seconds_per_epoch = 0.0;
  double initial_loss = 0.0;
  std::vector<double> train_loss;  // per epoch
  std::vector<double> test_eps;    // per epoch, eps_bar on the test set
};

struct CompareResult {
  std::vector<CompareRow> rows;  // KPOD first, then POD
};

/// Both methods on one snapshot source with identical seeds.
inline CompareResult compare(const Config& cfg, const SnapshotMatrix& snaps, const SnapshotMatrix& test) {
  CompareResult result;
  for (const ReductionMethod method : {ReductionMethod::Kpod, ReductionMethod::Pod}) {
    Config c = cfg;
    c.method = method;
    CompareRow row;
    row.method = method;
    const RomModel model =
        offline(c, snaps, [&](int, const RomModel& partial) { row.test_eps.push_back(evaluate(partial, test).eps_bar); });
    const EvalReport rep = evaluate(model, test);
    row.n = rep.n;
    row.parameter_count = rep.parameter_count;
    row.epochs = static_cast<int>(model.report.train_loss.size());
    row.eps_bar = rep.eps_bar;
    row.train_seconds = model.provenance.train_seconds;
    row.seconds_per_epoch = model.report.mean_epoch_seconds();
    row.initial_loss = model.report.initial_loss;
    row.train_loss = model.report.train_loss;
    result.rows.push_back(std::move(row));
  }
  return result;
}

inline CompareResult compare(const Config& cfg) { return compare(cfg, building_snapshots(cfg), test_snapshots(cfg)); }

/// compare.csv and compare_epochs.csv are seed-deterministic; wall-clock
/// figures go to compare_timing.csv.
inline void write_compare_csv(const std::string& dir, const CompareResult& r) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  std::ofstream main(root / "compare.csv");
  std::ofstream epochs(root / "compare_epochs.csv");
  std::ofstream timing(root / "compare_timing.csv");
  require(main && epochs && timing, ErrorKind::Io, "cannot write compare outputs in '" + dir + "'");
  main << "method,n,parameter_count,epochs,eps_bar\n";
  epochs << "method,epoch,train_loss,eps_bar\n";
  timing << "method,train_seconds,seconds_per_epoch\n";
  for (const auto& row : r.rows) {
    const std::string m = to_string(row.method);
    main << m << ',' << row.n << ',' << row.parameter_count << ',' << row.epochs << ',' << io::fmt(row.eps_bar)
         << '\n';
    for (std::size_t e = 0; e < row.train_loss.size(); ++e) {
      epochs << m << ',' << (e + 1) << ',' << io::fmt(row.train_loss[e]) << ','
             << (e < row.test_eps.size() ? io::fmt(row.test_eps[e]) : "") << '\n';
    }
    timing << m << ',' << io::fmt(row.train_seconds) << ',' << io::fmt(row.seconds_per_epoch) << '\n';
  }
}

struct SweepRow {
  double gamma = 0.0;
  Eigen::Index n = 0;
  Eigen::Index criterion_rank = 0;
  std::optional<double> eps_bar;  // empty for basis-only sweeps
};

/// KPOD at each gamma. With `train` unset only the basis is built.
inline std::vector<SweepRow> gamma_sweep(const Config& cfg, const SnapshotMatrix& snaps, const SnapshotMatrix* test,
                                         const std::vector<double>& gammas, bool train = true) {
  require(!gammas.empty(), ErrorKind::InvalidArgument, "gamma sweep needs at least one gamma");
  std::vector<SweepRow> rows;
  for (const double g : gammas) {
    Config c = cfg;
    c.method = ReductionMethod::Kpod;
    c.gamma = g;
    SweepRow row;
    row.gamma = g;
    if (train) {
      require(test != nullptr, ErrorKind::InvalidArgument, "gamma sweep with training needs a test set");
      const RomModel model = offline(c, snaps);
      row.n = model.basis.n();
      row.criterion_rank = model.basis.criterion_rank;
      row.eps_bar = evaluate(model, *test).eps_bar;
    } else {
      const ReducedBasis b = detail::stage("reduction", [&] { return kpod_basis(snaps, {g}, c.eps_hat); });
      row.n = b.n();
      row.criterion_rank = b.criterion_rank;
    }
    rows.push_back(row);
  }
  return rows;
}

inline void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << "gamma,n,criterion_rank,eps_bar\n";
  for (const auto& r : rows) {
    out << io::fmt(r.gamma) << ',' << r.n << ',' << r.criterion_rank << ',' << (r.eps_bar ? io::fmt(*r.eps_bar) : "")
        << '\n';
  }
}

}  // namespace kpodnn
