#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "kpodnn/error.hpp"

namespace kpodnn::nn {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  bool amsgrad = true;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  Eigen::VectorXd v_max;  // running max of the bias-corrected second moment
  std::int64_t step = 0;

  static AdamState zeros(Eigen::Index size) {
    return {Eigen::VectorXd::Zero(size), Eigen::VectorXd::Zero(size), Eigen::VectorXd::Zero(size), 0};
  }
};

/// One Adam update with bias correction. With AMSGrad the denominator uses
/// the elementwise running maximum of the corrected second moment.
inline void adam_step(Eigen::VectorXd& params, AdamState& state, const Eigen::VectorXd& grad, const AdamConfig& cfg,
                      double lr_scale = 1.0) {
  require(params.size() == grad.size() && state.m.size() == grad.size(), ErrorKind::DimensionMismatch,
          "optimizer state does not match parameter count");
  ++state.step;
  const auto t = static_cast<double>(state.step);
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  const Eigen::ArrayXd m_hat = state.m.array() / c1;
  Eigen::ArrayXd v_hat = state.v.array() / c2;
  if (cfg.amsgrad) {
    state.v_max = state.v_max.cwiseMax(v_hat.matrix());
    v_hat = state.v_max.array();
  }
  params.array() -= (cfg.lr * lr_scale) * m_hat / (v_hat.sqrt() + cfg.epsilon);
}

}  // namespace kpodnn::nn
