#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kpodnn/error.hpp"
#include "kpodnn/random.hpp"
#include "kpodnn/reduction.hpp"
#include "kpodnn/snapshots.hpp"

namespace kpodnn {

struct ParameterBox {
  std::vector<std::string> names;
  std::vector<double> lows;
  std::vector<double> highs;

  std::size_t dim() const { return names.size(); }

  void validate() const {
    require(lows.size() == names.size() && highs.size() == names.size(), ErrorKind::DimensionMismatch,
            "parameter box needs one low and one high bound per name");
    std::set<std::string> unique(names.begin(), names.end());
    require(unique.size() == names.size(), ErrorKind::InvalidArgument, "parameter names must be unique");
    for (std::size_t i = 0; i < names.size(); ++i) {
      require(lows[i] < highs[i], ErrorKind::InvalidArgument, "parameter '" + names[i] + "' has low >= high");
    }
  }
};

/// Latin hypercube design: per dimension, one uniform draw inside each of
/// `count` equal-width strata, paired across dimensions by independent
/// random permutations.
inline std::vector<std::vector<double>> latin_hypercube(const ParameterBox& box, std::size_t count,
                                                        std::uint64_t seed) {
  box.validate();
  require(count >= 1, ErrorKind::InvalidArgument, "latin_hypercube needs count >= 1");
  Rng rng(seed);
  std::vector<std::vector<double>> points(count, std::vector<double>(box.dim()));
  for (std::size_t d = 0; d < box.dim(); ++d) {
    const double width = (box.highs[d] - box.lows[d]) / static_cast<double>(count);
    const auto order = rng.permutation(count);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t stratum = order[i];
      points[i][d] = box.lows[d] + width * (static_cast<double>(stratum) + rng.uniform());
    }
  }
  return points;
}

/// Independent sorted 1D Latin hypercube samples, `per_axis` per dimension.
inline std::vector<std::vector<double>> latin_hypercube_axes(const ParameterBox& box, std::size_t per_axis,
                                                             std::uint64_t seed) {
  box.validate();
  require(per_axis >= 1, ErrorKind::InvalidArgument, "latin_hypercube_axes needs per_axis >= 1");
  std::vector<std::vector<double>> axes(box.dim());
  for (std::size_t d = 0; d < box.dim(); ++d) {
    ParameterBox axis{{box.names[d]}, {box.lows[d]}, {box.highs[d]}};
    for (const auto& p : latin_hypercube(axis, per_axis, stage_seed(seed, "lhs-axis-" + box.names[d]))) {
      axes[d].push_back(p[0]);
    }
    std::sort(axes[d].begin(), axes[d].end());
  }
  return axes;
}

/// All combinations of the axis values, last axis varying fastest.
inline std::vector<std::vector<double>> tensor_product(const std::vector<std::vector<double>>& axes) {
  std::vector<std::vector<double>> points{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<double>> next;
    next.reserve(points.size() * axis.size());
    for (const auto& prefix : points) {
      for (double v : axis) {
        auto p = prefix;
        p.push_back(v);
        next.push_back(std::move(p));
      }
    }
    points = std::move(next);
  }
  return points;
}

/// Tensor product of independent 1D Latin hypercube samples with
/// `per_axis` points per dimension. This is the building-set layout of the
/// wave benchmark (5 x 5 x 5).
inline std::vector<std::vector<double>> latin_hypercube_product(const ParameterBox& box, std::size_t per_axis,
                                                                std::uint64_t seed) {
  return tensor_product(latin_hypercube_axes(box, per_axis, seed));
}

/// Per-column affine map x -> (x - offset) / scale. Min-max over the
/// building set when enabled, identity otherwise.
struct Normalization {
  Eigen::VectorXd offset;
  Eigen::VectorXd scale;

  static Normalization identity(Eigen::Index dim) {
    return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
  }

  static Normalization min_max(const Eigen::MatrixXd& inputs) {
    Normalization n;
    n.offset = inputs.colwise().minCoeff().transpose();
    n.scale = (inputs.colwise().maxCoeff().transpose() - n.offset);
    for (Eigen::Index j = 0; j < n.scale.size(); ++j) {
      if (!(n.scale[j] > 0.0)) n.scale[j] = 1.0;  // constant column maps to 0
    }
    return n;
  }

  Eigen::Index dim() const { return offset.size(); }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const {
    require(rows.cols() == dim(), ErrorKind::DimensionMismatch, "normalization dimension mismatch");
    return (rows.rowwise() - offset.transpose()).array().rowwise() / scale.transpose().array();
  }

  Eigen::MatrixXd invert(const Eigen::MatrixXd& rows) const {
    require(rows.cols() == dim(), ErrorKind::DimensionMismatch, "normalization dimension mismatch");
    return (rows.array().rowwise() * scale.transpose().array()).matrix().rowwise() + offset.transpose();
  }

  /// True when every raw input lies inside the box the map was fitted on.
  bool contains(const Eigen::VectorXd& raw) const {
    const Eigen::VectorXd z = ((raw - offset).array() / scale.array()).matrix();
    return (z.array() >= -1e-12).all() && (z.array() <= 1.0 + 1e-12).all();
  }
};

/// Regression pairs (t; mu) -> V^T s. `inputs` holds the normalized rows.
struct Dataset {
  Eigen::MatrixXd inputs;   // N x (m + 1)
  Eigen::MatrixXd outputs;  // N x n
  Normalization normalization;

  Eigen::Index rows() const { return inputs.rows(); }

  Dataset subset(const std::vector<std::size_t>& idx) const {
    Dataset d;
    d.inputs.resize(static_cast<Eigen::Index>(idx.size()), inputs.cols());
    d.outputs.resize(static_cast<Eigen::Index>(idx.size()), outputs.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      d.inputs.row(static_cast<Eigen::Index>(i)) = inputs.row(static_cast<Eigen::Index>(idx[i]));
      d.outputs.row(static_cast<Eigen::Index>(i)) = outputs.row(static_cast<Eigen::Index>(idx[i]));
    }
    d.normalization = normalization;
    return d;
  }
};

/// Raw (t, mu_1, ..., mu_m) rows of the snapshot labels.
inline Eigen::MatrixXd label_inputs(const SnapshotMatrix& snaps) {
  const auto m = static_cast<Eigen::Index>(snaps.param_dim());
  Eigen::MatrixXd x(snaps.size(), m + 1);
  for (Eigen::Index j = 0; j < snaps.size(); ++j) {
    const auto& l = snaps.labels[static_cast<std::size_t>(j)];
    x(j, 0) = l.t;
    for (Eigen::Index p = 0; p < m; ++p) x(j, p + 1) = l.mu[static_cast<std::size_t>(p)];
  }
  return x;
}

/// Builds the regression dataset. Pass a fitted normalization to reuse
/// building-set statistics (test data); otherwise one is fitted here when
/// `scale_inputs` is set.
inline Dataset build_io_pairs(const SnapshotMatrix& snaps, const ReducedBasis& basis, bool scale_inputs = true,
                              const Normalization* fitted = nullptr) {
  snaps.validate();
  require(basis.dofs() == snaps.dofs(), ErrorKind::DimensionMismatch,
          "basis has N_h = " + std::to_string(basis.dofs()) + " but snapshots have " +
              std::to_string(snaps.dofs()));
  const Eigen::MatrixXd raw = label_inputs(snaps);
  Dataset d;
  if (fitted) {
    d.normalization = *fitted;
  } else {
    d.normalization = scale_inputs ? Normalization::min_max(raw) : Normalization::identity(raw.cols());
  }
  d.inputs = d.normalization.apply(raw);
  d.outputs = (basis.v.transpose() * snaps.data).transpose();
  return d;
}

struct FoldPlan {
  int k = 5;
  std::vector<int> assignment;  // fold index per row
  std::uint64_t seed = 0;

  std::vector<std::size_t> validation_rows(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      if (assignment[i] == fold) out.push_back(i);
    }
    return out;
  }

  std::vector<std::size_t> training_rows(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      if (assignment[i] != fold) out.push_back(i);
    }
    return out;
  }
};

/// Shuffled K-fold partition; the first (rows mod K) folds get one extra row.
inline FoldPlan kfold_split(std::size_t rows, int k, std::uint64_t seed) {
  require(k >= 1, ErrorKind::InvalidArgument, "K must be >= 1");
  require(rows >= static_cast<std::size_t>(k), ErrorKind::TooFewRows,
          "cannot split " + std::to_string(rows) + " rows into " + std::to_string(k) + " folds");
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignment.assign(rows, 0);
  Rng rng(seed);
  const auto order = rng.permutation(rows);
  const std::size_t base = rows / static_cast<std::size_t>(k);
  const std::size_t extra = rows % static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) plan.assignment[order[pos++]] = f;
  }
  return plan;
}

inline FoldPlan kfold_split(const Dataset& dataset, int k, std::uint64_t seed) {
  return kfold_split(static_cast<std::size_t>(dataset.rows()), k, seed);
}

}  // namespace kpodnn
