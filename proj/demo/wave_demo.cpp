// Offline build and online queries for the 1D wave benchmark on a coarse
// grid. Runs in a few seconds.

#include <iostream>

#include "kpodnn/kpodnn.hpp"

using namespace kpodnn;

int main() {
  Config cfg;
  cfg.grid.intervals = 128;
  cfg.stored_intervals = 40;
  cfg.per_axis = 3;
  cfg.train.epochs = 40;

  try {
    const SnapshotMatrix snaps = generate_building_set(cfg);
    const SnapshotMatrix test = generate_test_set(cfg);
    std::cout << "building set: " << snaps.dofs() << " nodes x " << snaps.size() << " snapshots\n";

    for (const ReductionMethod method : {ReductionMethod::Kpod, ReductionMethod::Pod}) {
      Config c = cfg;
      c.method = method;
      const RomModel model = offline(c, snaps);
      const EvalReport r = evaluate(model, test);
      std::cout << to_string(method) << ": n=" << model.basis.n() << " parameters=" << model.net.parameter_size()
                << " loss " << io::fmt(model.report.train_loss.front()) << " -> "
                << io::fmt(model.report.train_loss.back()) << " test eps_bar=" << io::fmt(r.eps_bar) << '\n';

      // One online query at the Table 3 test triple.
      const auto& mu = cfg.test_params.front();
      const auto t0 = std::chrono::steady_clock::now();
      const Eigen::VectorXd u = online(model, 26.0, {mu[0], mu[1], mu[2]});
      std::cout << "  online u(t=26) max |u| = " << io::fmt(u.cwiseAbs().maxCoeff()) << " in "
                << io::fmt(detail::seconds_since(t0) * 1e6) << " us\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_numerical(e.kind()) ? 3 : 2;
  }
  return 0;
}
