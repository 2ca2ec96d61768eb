#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kpodnn/error.hpp"
#include "kpodnn/network.hpp"
#include "kpodnn/optimizer.hpp"
#include "kpodnn/random.hpp"
#include "kpodnn/sampling.hpp"

namespace kpodnn::nn {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 10;
  AdamConfig adam;
  double theta = 0.01;
  std::uint64_t seed = 0;
  int kfold = 5;
  // Optional step decay: lr *= decay_factor every decay_every epochs (0 = off).
  double decay_factor = 1.0;
  int decay_every = 0;

  void validate() const {
    require(epochs >= 1, ErrorKind::InvalidArgument, "epochs must be >= 1");
    require(batch_size >= 1, ErrorKind::InvalidArgument, "batch_size must be >= 1");
    require(adam.beta1 > 0.0 && adam.beta1 < 1.0 && adam.beta2 > 0.0 && adam.beta2 < 1.0,
            ErrorKind::InvalidArgument, "beta1 and beta2 must lie in (0, 1)");
    require(adam.lr > 0.0, ErrorKind::InvalidArgument, "learning rate must be positive");
    require(theta >= 0.0, ErrorKind::InvalidArgument, "theta must be >= 0");
  }
};

struct TrainReport {
  double initial_loss = 0.0;        // full training set, before the first update
  std::vector<double> train_loss;   // full training set relative L2 after each epoch
  std::vector<double> val_loss;     // validation relative L2 after each epoch (empty without holdout)
  std::vector<double> epoch_seconds;
  std::int64_t parameter_count = 0;
  std::optional<double> generalization_error;

  double mean_epoch_seconds() const {
    if (epoch_seconds.empty()) return 0.0;
    double s = 0.0;
    for (double v : epoch_seconds) s += v;
    return s / static_cast<double>(epoch_seconds.size());
  }
};

namespace detail {

inline double checked(double v, int epoch) {
  if (!std::isfinite(v)) {
    fail(ErrorKind::Diverged, "loss became non-finite at epoch " + std::to_string(epoch));
  }
  return v;
}

}  // namespace detail

using EpochCallback = std::function<void(int epoch, const Network& net)>;

/// Minibatch training with Adam. Rows in `train_rows` are reshuffled every
/// epoch; the batch loss is the regularized relative L2 over the batch.
/// Batches whose targets are all zero carry no relative-error signal and are
/// skipped.

inline TrainReport train(Network& net, const Dataset& data, const std::vector<std::size_t>& train_rows,
                         const std::vector<std::size_t>& val_rows, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {}) {
  cfg.validate();
  require(!train_rows.empty(), ErrorKind::InvalidArgument, "training set is empty");
  require(data.outputs.cols() == net.spec.output_dim && data.inputs.cols() == net.spec.input_dim,
          ErrorKind::DimensionMismatch, "dataset shape does not match the network");

  const Dataset train_set = data.subset(train_rows);
  const std::optional<Dataset> val_set =
      val_rows.empty() ? std::nullopt : std::optional<Dataset>(data.subset(val_rows));

  TrainReport report;
  report.parameter_count = parameter_count(net.spec);
  report.initial_loss = relative_l2(forward(net, train_set.inputs), train_set.outputs);

  Rng rng(cfg.seed);
  Eigen::VectorXd params = net.parameters();
  AdamState state = AdamState::zeros(params.size());
  const auto rows = static_cast<std::size_t>(train_set.rows());
  std::vector<std::size_t> order(rows);
  for (std::size_t i = 0; i < rows; ++i) order[i] = i;
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  Eigen::MatrixXd bx(cfg.batch_size, train_set.inputs.cols());
  Eigen::MatrixXd by(cfg.batch_size, train_set.outputs.cols());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    double lr_scale = 1.0;
    if (cfg.decay_every > 0) lr_scale = std::pow(cfg.decay_factor, epoch / cfg.decay_every);
    rng.shuffle(order);
    for (std::size_t first = 0; first < rows; first += batch) {
      const std::size_t count = std::min(batch, rows - first);
      bx.resize(static_cast<Eigen::Index>(count), bx.cols());
      by.resize(static_cast<Eigen::Index>(count), by.cols());
      for (std::size_t i = 0; i < count; ++i) {
        bx.row(static_cast<Eigen::Index>(i)) = train_set.inputs.row(static_cast<Eigen::Index>(order[first + i]));
        by.row(static_cast<Eigen::Index>(i)) = train_set.outputs.row(static_cast<Eigen::Index>(order[first + i]));
      }
      if (by.squaredNorm() == 0.0) continue;
      const LossGradient lg = backward(net, bx, by, cfg.theta);
      detail::checked(lg.loss, epoch + 1);
      adam_step(params, state, lg.gradient, cfg.adam, lr_scale);
      net.set_parameters(params);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.epoch_seconds.push_back(seconds);
    report.train_loss.push_back(
        detail::checked(relative_l2(forward(net, train_set.inputs), train_set.outputs), epoch + 1));
    if (val_set) {
      report.val_loss.push_back(
          detail::checked(relative_l2(forward(net, val_set->inputs), val_set->outputs), epoch + 1));
    }
    if (on_epoch) on_epoch(epoch + 1, net);
  }
  return report;
}

/// Trains on every row.
inline TrainReport train(Network& net, const Dataset& data, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {}) {
  std::vector<std::size_t> all(static_cast<std::size_t>(data.rows()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return train(net, data, all, {}, cfg, on_epoch);
}

struct CrossValidation {
  std::vector<double> generalization_error;  // one per candidate
  std::size_t best = 0;
};

/// K-fold model selection. For each candidate,
/// E_gen = (1 / N_v) * sum_k ||Yhat_k - Y_k|| / ||Y_k|| over the validation
/// folds, with N_v the mean validation-fold size.
inline CrossValidation cross_validate(const Dataset& data, const std::vector<NetworkSpec>& candidates,
                                      const TrainConfig& cfg) {
  require(cfg.kfold >= 2, ErrorKind::InvalidArgument, "cross-validation needs K >= 2");
  require(!candidates.empty(), ErrorKind::InvalidArgument, "no candidate architectures");
  const FoldPlan plan = kfold_split(data, cfg.kfold, stage_seed(cfg.seed, "kfold"));
  const double mean_fold = static_cast<double>(data.rows()) / cfg.kfold;

  CrossValidation cv;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double sum = 0.0;
    for (int fold = 0; fold < cfg.kfold; ++fold) {
      const auto val_rows = plan.validation_rows(fold);
      const auto train_rows = plan.training_rows(fold);
      const std::string tag = "cv-" + std::to_string(c) + "-" + std::to_string(fold);
      Network net = init_glorot(candidates[c], stage_seed(cfg.seed, tag + "-init"));
      TrainConfig fold_cfg = cfg;
      fold_cfg.seed = stage_seed(cfg.seed, tag + "-shuffle");
      train(net, data, train_rows, {}, fold_cfg);
      const Dataset val = data.subset(val_rows);
      sum += relative_l2(forward(net, val.inputs), val.outputs);
    }
    cv.generalization_error.push_back(sum / mean_fold);
    if (cv.generalization_error[c] < cv.generalization_error[cv.best]) cv.best = c;
  }
  return cv;
}

}  // namespace kpodnn::nn
