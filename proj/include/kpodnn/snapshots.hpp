#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kpodnn/error.hpp"
#include "kpodnn/wave_fom.hpp"

namespace kpodnn {

/// (t, mu) label attached to one snapshot column.
struct ColumnLabel {
  double t = 0.0;
  std::vector<double> mu;

  bool operator==(const ColumnLabel&) const = default;
};

enum class SnapshotOrigin { Generated, Ingested };

inline std::string to_string(SnapshotOrigin o) {
  return o == SnapshotOrigin::Generated ? "generated" : "ingested";
}

inline SnapshotOrigin origin_from_string(const std::string& s) {
  if (s == "generated") return SnapshotOrigin::Generated;
  if (s == "ingested") return SnapshotOrigin::Ingested;
  fail(ErrorKind::Format, "unknown snapshot origin '" + s + "'");
}

/// N_h x N_s matrix of full-order solutions, one labelled column per
/// (t, mu) sample.
struct SnapshotMatrix {
  Eigen::MatrixXd data;
  std::vector<ColumnLabel> labels;
  SnapshotOrigin origin = SnapshotOrigin::Generated;

  Eigen::Index dofs() const { return data.rows(); }
  Eigen::Index size() const { return data.cols(); }
  std::size_t param_dim() const { return labels.empty() ? 0 : labels.front().mu.size(); }

  void validate() const {
    require(static_cast<Eigen::Index>(labels.size()) == data.cols(), ErrorKind::DimensionMismatch,
            "snapshot matrix has " + std::to_string(data.cols()) + " columns but " +
                std::to_string(labels.size()) + " labels");
    for (const auto& l : labels) {
      require(l.mu.size() == param_dim(), ErrorKind::DimensionMismatch,
              "column labels carry parameter vectors of different lengths");
    }
    require(data.allFinite(), ErrorKind::InvalidArgument, "snapshot data contains non-finite values");
  }

  /// Columns [first, first + count) as a new matrix with matching labels.
  SnapshotMatrix slice(Eigen::Index first, Eigen::Index count) const {
    SnapshotMatrix out;
    out.data = data.middleCols(first, count);
    out.labels.assign(labels.begin() + first, labels.begin() + first + count);
    out.origin = origin;
    return out;
  }
};

/// Parameter-major, time-minor column layout. Every `stride`-th stored
/// level of each trajectory (starting at level 0) becomes a column, labelled
/// (t, (A0, x0, sigma)).
inline SnapshotMatrix assemble_snapshots(std::span<const wave::Trajectory> trajectories,
                                         int stride = 1) {
  require(stride >= 1, ErrorKind::InvalidArgument, "stride must be >= 1");
  SnapshotMatrix out;
  if (trajectories.empty()) return out;
  const Eigen::Index dofs = trajectories.front().states.rows();
  Eigen::Index total = 0;
  for (const auto& tr : trajectories) {
    require(tr.states.rows() == dofs, ErrorKind::DimensionMismatch,
            "trajectories differ in N_h (" + std::to_string(dofs) + " vs " +
                std::to_string(tr.states.rows()) + ")");
    total += (tr.states.cols() + stride - 1) / stride;
  }
  out.data.resize(dofs, total);
  out.labels.reserve(static_cast<std::size_t>(total));
  Eigen::Index col = 0;
  for (const auto& tr : trajectories) {
    const std::vector<double> mu{tr.params.amplitude, tr.params.center, tr.params.width};
    for (Eigen::Index j = 0; j < tr.states.cols(); j += stride) {
      out.data.col(col++) = tr.states.col(j);
      out.labels.push_back({tr.times[j], mu});
    }
  }
  return out;
}

}  // namespace kpodnn
