// kpodnn: build, train and evaluate KPOD-NN / POD-NN reduced models.
//
// Exit status: 0 success, 2 invalid input or configuration, 3 numerical
// failure (CFL violation, divergence, degenerate spectrum).

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "kpodnn/kpodnn.hpp"

using namespace kpodnn;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_file;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> flags;  // config key, raw value
};

// A flag that overrides one config key.
CLI::Option* key_flag(CLI::App* app, Options& o, const std::string& name, const std::string& key,
                      const std::string& help) {
  return app->add_option_function<std::string>(
      name, [&o, key](const std::string& v) { o.flags.emplace_back(key, v); }, help + " (" + key + ")");
}

Config resolve(const Options& o) {
  Config cfg;
  if (!o.config_file.empty()) cfg.apply(read_key_values(o.config_file));
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    require(eq != std::string::npos && eq > 0, ErrorKind::InvalidArgument, "--set expects key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  for (const auto& [k, v] : o.flags) cfg.set(k, v);
  cfg.validate();
  return cfg;
}

std::string in_output_dir(const Config& cfg, const std::string& explicit_path, const std::string& name) {
  if (!explicit_path.empty()) return explicit_path;
  fs::create_directories(cfg.output_dir);
  return (fs::path(cfg.output_dir) / name).string();
}

void ensure_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

// One CSV per trajectory: consecutive columns sharing a parameter label.
void write_trajectory_csvs(const std::string& dir, const SnapshotMatrix& s) {
  fs::create_directories(dir);
  Eigen::Index start = 0;
  int index = 0;
  while (start < s.size()) {
    Eigen::Index end = start + 1;
    while (end < s.size() && s.labels[end].mu == s.labels[start].mu) ++end;
    wave::Trajectory tr;
    tr.states = s.data.middleCols(start, end - start);
    tr.times.resize(end - start);
    for (Eigen::Index j = start; j < end; ++j) tr.times[j - start] = s.labels[j].t;
    char name[32];
    std::snprintf(name, sizeof name, "trajectory_%04d.csv", index++);
    io::write_trajectory_csv((fs::path(dir) / name).string(), tr);
    start = end;
  }
}

void print_row(const std::string& what, const std::string& detail) { std::cout << what << ": " << detail << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KPOD-NN reduced order modelling toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_file, "key-value config file with [fom] [sampling] [reduction] [nn] [run]")
      ->check(CLI::ExistingFile);
  app.add_option("--set", o.sets, "override any config key, e.g. --set nn.theta=0");
  key_flag(&app, o, "--seed", "run.seed", "root seed");
  app.add_flag_callback("--no-input-scaling", [&o] { o.flags.emplace_back("sampling.input_scaling", "false"); },
                        "feed raw (t, mu) to the network");

  // fom-generate
  auto* gen = app.add_subcommand("fom-generate", "solve the wave FOM and write a SNAP1 snapshot file");
  std::string gen_out, gen_csv;
  bool gen_test = false;
  gen->add_option("--out", gen_out, "SNAP1 output (default <output_dir>/snapshots.snap)");
  gen->add_option("--csv", gen_csv, "also dump one CSV per trajectory into this directory");
  gen->add_flag("--test", gen_test, "solve the test triples instead of the building set");
  key_flag(gen, o, "--intervals", "fom.intervals", "spatial intervals");
  key_flag(gen, o, "--stored-intervals", "fom.stored_intervals", "stored time intervals");
  key_flag(gen, o, "--per-axis", "sampling.per_axis", "LHS samples per parameter axis");

  // reduce
  auto* red = app.add_subcommand("reduce", "SNAP1 -> RB1 basis and spectrum CSV");
  std::string red_out, red_spec;
  key_flag(red, o, "--snapshots", "run.snapshots", "SNAP1 or CSV building set (default: run the FOM)");
  red->add_option("--out", red_out, "RB1 output (default <output_dir>/basis.rb1)");
  red->add_option("--spectrum", red_spec, "spectrum CSV (default <output_dir>/spectrum.csv)");
  key_flag(red, o, "--method", "reduction.method", "pod or kpod");
  key_flag(red, o, "--gamma", "reduction.gamma", "RBF kernel width");
  key_flag(red, o, "--eps-hat", "reduction.eps_hat", "relative tail-energy tolerance");

  // train
  auto* trn = app.add_subcommand("train", "SNAP1 + RB1 -> trained model directory and history CSV");
  std::string trn_basis, trn_out, trn_hist;
  key_flag(trn, o, "--snapshots", "run.snapshots", "SNAP1 or CSV building set (default: run the FOM)");
  trn->add_option("--basis", trn_basis, "RB1 basis (default: build one from the config)");
  trn->add_option("--out", trn_out, "model directory (default <output_dir>/model)");
  trn->add_option("--history", trn_hist, "history CSV (default <model>/history.csv)");
  key_flag(trn, o, "--epochs", "nn.epochs", "training epochs");
  key_flag(trn, o, "--lr", "nn.lr", "Adam learning rate");
  key_flag(trn, o, "--batch-size", "nn.batch_size", "minibatch size");
  trn->add_option_function<std::string>(
      "--kfold",
      [&o](const std::string& v) {
        o.flags.emplace_back("nn.kfold", v);
        o.flags.emplace_back("nn.cross_validate", "true");
      },
      "select depth by K-fold cross-validation with this K (nn.kfold, nn.cross_validate)");
  key_flag(trn, o, "--method", "reduction.method", "pod or kpod, when no --basis is given");
  key_flag(trn, o, "--gamma", "reduction.gamma", "RBF kernel width, when no --basis is given");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "model + test SNAP1 -> per-sample error CSV");
  std::string ev_model, ev_out, ev_summary;
  ev->add_option("--model", ev_model, "model directory written by train")->required()->check(CLI::ExistingDirectory);
  key_flag(ev, o, "--test", "run.test_snapshots", "test SNAP1 or CSV (default: solve the test triples)");
  ev->add_option("--out", ev_out, "per-sample CSV (default <output_dir>/eval.csv)");
  ev->add_option("--summary", ev_summary, "one-row summary CSV (default <output_dir>/eval_summary.csv)");

  // compare
  auto* cmp = app.add_subcommand("compare", "KPOD-NN vs POD-NN on one snapshot source");
  std::string cmp_out;
  key_flag(cmp, o, "--snapshots", "run.snapshots", "SNAP1 or CSV building set");
  key_flag(cmp, o, "--test", "run.test_snapshots", "test SNAP1 or CSV");
  cmp->add_option("--out", cmp_out, "output directory (default <output_dir>)");
  key_flag(cmp, o, "--gamma", "reduction.gamma", "RBF kernel width");
  key_flag(cmp, o, "--eps-hat", "reduction.eps_hat", "relative tail-energy tolerance");
  key_flag(cmp, o, "--epochs", "nn.epochs", "training epochs");
  key_flag(cmp, o, "--lr", "nn.lr", "Adam learning rate");

  // gamma-sweep
  auto* sw = app.add_subcommand("gamma-sweep", "KPOD basis size and error for several gammas");
  std::vector<double> sw_gammas{1e-10, 1e-5, 1.0};
  std::string sw_out;
  bool sw_basis_only = false;
  key_flag(sw, o, "--snapshots", "run.snapshots", "SNAP1 or CSV building set");
  key_flag(sw, o, "--test", "run.test_snapshots", "test SNAP1 or CSV");
  sw->add_option("--gammas", sw_gammas, "comma-separated gammas")->delimiter(',')->capture_default_str();
  sw->add_flag("--basis-only", sw_basis_only, "report n only, skip training");
  sw->add_option("--out", sw_out, "CSV output (default <output_dir>/gamma_sweep.csv)");
  key_flag(sw, o, "--epochs", "nn.epochs", "training epochs");

  // spectrum
  auto* sp = app.add_subcommand("spectrum", "POD and kernel eigenvalue decay as CSV");
  std::vector<double> sp_gammas{1e-10, 1e-5, 1.0};
  std::string sp_out;
  bool sp_no_pod = false;
  key_flag(sp, o, "--snapshots", "run.snapshots", "SNAP1 or CSV building set");
  sp->add_option("--gammas", sp_gammas, "comma-separated gammas")->delimiter(',')->capture_default_str();
  sp->add_flag("--no-pod", sp_no_pod, "kernel spectra only");
  sp->add_option("--out", sp_out, "CSV output (default <output_dir>/spectrum.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const Config cfg = resolve(o);

    if (*gen) {
      const SnapshotMatrix s = gen_test ? generate_test_set(cfg) : generate_building_set(cfg);
      const std::string out = in_output_dir(cfg, gen_out, gen_test ? "test.snap" : "snapshots.snap");
      ensure_parent(out);
      io::write_snapshots(out, s);
      if (!gen_csv.empty()) write_trajectory_csvs(gen_csv, s);
      print_row("snapshots", std::to_string(s.dofs()) + " x " + std::to_string(s.size()) + " -> " + out);
    } else if (*red) {
      const SnapshotMatrix s = building_snapshots(cfg);
      const ReducedBasis b = detail::stage("reduction", [&] { return build_basis(s, cfg.method, cfg.gamma, cfg.eps_hat); });
      const std::string out = in_output_dir(cfg, red_out, "basis.rb1");
      const std::string spec = in_output_dir(cfg, red_spec, "spectrum.csv");
      ensure_parent(out);
      ensure_parent(spec);
      io::write_basis(out, b);
      std::vector<SpectrumRow> rows;
      for (Eigen::Index k = 0; k < b.spectrum.sigmas.size(); ++k)
        rows.push_back({k + 1, b.spectrum.sigmas[k] * b.spectrum.sigmas[k], b.method, b.gamma});
      io::write_spectrum_csv(spec, rows);
      print_row("basis", to_string(b.method) + " n=" + std::to_string(b.n()) + " -> " + out);
    } else if (*trn) {
      const SnapshotMatrix s = building_snapshots(cfg);
      const RomModel model = trn_basis.empty()
                                 ? offline(cfg, s)
                                 : train_on_basis(cfg, s, detail::stage("ingest", [&] { return io::read_basis(trn_basis); }));
      const std::string dir = in_output_dir(cfg, trn_out, "model");
      save_model(dir, model);
      const std::string hist = trn_hist.empty() ? (fs::path(dir) / "history.csv").string() : trn_hist;
      ensure_parent(hist);
      io::write_history_csv(hist, model.report);
      std::string detail = to_string(model.basis.method) + " n=" + std::to_string(model.basis.n()) +
                           " parameters=" + std::to_string(model.net.parameter_size()) +
                           " final loss=" + io::fmt(model.report.train_loss.back());
      if (model.report.generalization_error) detail += " E_gen=" + io::fmt(*model.report.generalization_error);
      print_row("model", detail + " -> " + dir);
    } else if (*ev) {
      const RomModel model = detail::stage("ingest", [&] { return load_model(ev_model); });
      const SnapshotMatrix test = test_snapshots(cfg);
      const EvalReport r = detail::stage("evaluate", [&] { return evaluate(model, test); });
      const std::string out = in_output_dir(cfg, ev_out, "eval.csv");
      const std::string summary = in_output_dir(cfg, ev_summary, "eval_summary.csv");
      ensure_parent(out);
      ensure_parent(summary);
      write_eval_csv(out, r);
      write_eval_summary_csv(summary, r);
      if (r.excluded_zero_norm > 0)
        std::cerr << "warning: " << r.excluded_zero_norm << " zero-norm test columns excluded\n";
      print_row("eval", to_string(r.method) + " n=" + std::to_string(r.n) + " eps_bar=" + io::fmt(r.eps_bar) +
                            " over " + std::to_string(r.samples.size()) + " samples -> " + out);
    } else if (*cmp) {
      const CompareResult r = compare(cfg);
      const std::string dir = cmp_out.empty() ? cfg.output_dir : cmp_out;
      write_compare_csv(dir, r);
      for (const auto& row : r.rows)
        print_row(to_string(row.method), "n=" + std::to_string(row.n) + " parameters=" +
                                             std::to_string(row.parameter_count) + " eps_bar=" + io::fmt(row.eps_bar) +
                                             " s/epoch=" + io::fmt(row.seconds_per_epoch));
      print_row("compare", "-> " + dir);
    } else if (*sw) {
      const SnapshotMatrix s = building_snapshots(cfg);
      std::optional<SnapshotMatrix> test;
      if (!sw_basis_only) test = test_snapshots(cfg);
      const auto rows = gamma_sweep(cfg, s, test ? &*test : nullptr, sw_gammas, !sw_basis_only);
      const std::string out = in_output_dir(cfg, sw_out, "gamma_sweep.csv");
      ensure_parent(out);
      write_sweep_csv(out, rows);
      for (const auto& row : rows)
        print_row("gamma=" + io::fmt(row.gamma),
                  "n=" + std::to_string(row.n) + (row.eps_bar ? " eps_bar=" + io::fmt(*row.eps_bar) : ""));
    } else if (*sp) {
      const SnapshotMatrix s = building_snapshots(cfg);
      const auto rows = detail::stage("reduction", [&] { return spectrum_export(s, !sp_no_pod, sp_gammas); });
      const std::string out = in_output_dir(cfg, sp_out, "spectrum.csv");
      ensure_parent(out);
      io::write_spectrum_csv(out, rows);
      print_row("spectrum", std::to_string(rows.size()) + " rows -> " + out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_numerical(e.kind()) ? 3 : 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
