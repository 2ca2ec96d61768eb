#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kpodnn/error.hpp"
#include "kpodnn/random.hpp"

namespace kpodnn::nn {

/// Fully connected layout: raw input of size m+1, `hidden_count` dense
/// PReLU layers of width `hidden_width`, linear dense output layer.
struct NetworkSpec {
  int input_dim = 1;
  int hidden_count = 1;
  int hidden_width = 1;
  int output_dim = 1;
  double depth_base = 10.0;

  std::vector<int> layer_sizes() const {
    std::vector<int> sizes{input_dim};
    for (int h = 0; h < hidden_count; ++h) sizes.push_back(hidden_width);
    sizes.push_back(output_dim);
    return sizes;
  }

  void validate() const {
    require(input_dim >= 1 && hidden_count >= 1 && hidden_width >= 1 && output_dim >= 1,
            ErrorKind::InvalidArgument, "network dimensions must all be >= 1");
  }

  bool operator==(const NetworkSpec&) const = default;
};

/// Hidden depth max(1, ceil(log_B n)), computed as the smallest h with B^h >= n
/// so exact powers of B do not round up.
inline int depth_for(int n, double base) {
  require(n >= 1, ErrorKind::InvalidArgument, "reduced dimension must be >= 1");
  require(base > 1.0, ErrorKind::InvalidArgument, "depth base must be > 1");
  int h = 0;
  double power = 1.0;
  while (power < static_cast<double>(n) * (1.0 - 1e-12)) {
    power *= base;
    ++h;
  }
  return std::max(h, 1);
}

inline NetworkSpec architecture_for(int m, int n, double base = 10.0) {
  require(m >= 0, ErrorKind::InvalidArgument, "parameter count m must be >= 0");
  NetworkSpec spec;
  spec.input_dim = m + 1;
  spec.hidden_count = depth_for(n, base);
  spec.hidden_width = n;
  spec.output_dim = n;
  spec.depth_base = base;
  return spec;
}

/// Weights, biases and PReLU slopes; slopes are empty on the output layer.
inline std::int64_t parameter_count(const NetworkSpec& spec) {
  const auto sizes = spec.layer_sizes();
  std::int64_t count = 0;
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    count += static_cast<std::int64_t>(sizes[l - 1]) * sizes[l] + sizes[l];
    if (l + 1 < sizes.size()) count += sizes[l];
  }
  return count;
}

struct Layer {
  Eigen::MatrixXd weights;  // fan_out x fan_in
  Eigen::VectorXd bias;
  Eigen::VectorXd slopes;  // per-unit PReLU slopes, empty for the output layer

  bool has_activation() const { return slopes.size() > 0; }
};

struct Network {
  NetworkSpec spec;
  std::vector<Layer> layers;

  Eigen::Index parameter_size() const {
    Eigen::Index total = 0;
    for (const auto& l : layers) total += l.weights.size() + l.bias.size() + l.slopes.size();
    return total;
  }

  /// Flattened parameters in layer order: weights (column-major), bias, slopes.
  Eigen::VectorXd parameters() const {
    Eigen::VectorXd p(parameter_size());
    Eigen::Index at = 0;
    for (const auto& l : layers) {
      p.segment(at, l.weights.size()) = l.weights.reshaped();
      at += l.weights.size();
      p.segment(at, l.bias.size()) = l.bias;
      at += l.bias.size();
      p.segment(at, l.slopes.size()) = l.slopes;
      at += l.slopes.size();
    }
    return p;
  }

  void set_parameters(const Eigen::VectorXd& p) {
    require(p.size() == parameter_size(), ErrorKind::DimensionMismatch, "parameter vector size mismatch");
    Eigen::Index at = 0;
    for (auto& l : layers) {
      l.weights.reshaped() = p.segment(at, l.weights.size());
      at += l.weights.size();
      l.bias = p.segment(at, l.bias.size());
      at += l.bias.size();
      l.slopes = p.segment(at, l.slopes.size());
      at += l.slopes.size();
    }
  }

  /// Mask over parameters(): 1 for weight entries, 0 for biases and slopes.
  Eigen::VectorXd weight_mask() const {
    Eigen::VectorXd mask = Eigen::VectorXd::Zero(parameter_size());
    Eigen::Index at = 0;
    for (const auto& l : layers) {
      mask.segment(at, l.weights.size()).setOnes();
      at += l.weights.size() + l.bias.size() + l.slopes.size();
    }
    return mask;
  }

  double weight_sq_sum() const {
    double s = 0.0;
    for (const auto& l : layers) s += l.weights.squaredNorm();
    return s;
  }
};

inline constexpr double kInitialSlope = 0.25;

/// Zero-initialized network with the given layout (slopes at their initial value).
inline Network make_network(const NetworkSpec& spec) {
  spec.validate();
  Network net;
  net.spec = spec;
  const auto sizes = spec.layer_sizes();
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    Layer layer;
    layer.weights = Eigen::MatrixXd::Zero(sizes[l], sizes[l - 1]);
    layer.bias = Eigen::VectorXd::Zero(sizes[l]);
    if (l + 1 < sizes.size()) layer.slopes = Eigen::VectorXd::Constant(sizes[l], kInitialSlope);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
inline Network init_glorot(const NetworkSpec& spec, std::uint64_t seed) {
  Network net = make_network(spec);
  Rng rng(seed);
  for (auto& layer : net.layers) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.weights.rows() + layer.weights.cols()));
    for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
      for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) layer.weights(i, j) = rng.uniform(-bound, bound);
    }
  }
  return net;
}

inline double prelu(double x, double slope) { return x >= 0.0 ? x : slope * x; }

/// d/dx; the kink at 0 takes the positive-branch value.
inline double prelu_dx(double x, double slope) { return x >= 0.0 ? 1.0 : slope; }

inline double prelu_dslope(double x) { return x >= 0.0 ? 0.0 : x; }

namespace detail {

struct Activations {
  std::vector<Eigen::MatrixXd> inputs;  // per layer: its input, units x batch
  std::vector<Eigen::MatrixXd> pre;     // per layer: pre-activation, units x batch
  Eigen::MatrixXd output;               // output_dim x batch
};

inline Activations run(const Network& net, const Eigen::MatrixXd& x, bool keep) {
  require(x.cols() == net.spec.input_dim, ErrorKind::DimensionMismatch,
          "input has " + std::to_string(x.cols()) + " columns, network expects " +
              std::to_string(net.spec.input_dim));
  Activations act;
  Eigen::MatrixXd a = x.transpose();
  for (const auto& layer : net.layers) {
    Eigen::MatrixXd z = layer.weights * a;
    z.colwise() += layer.bias;
    if (keep) {
      act.inputs.push_back(a);
      act.pre.push_back(z);
    }
    if (layer.has_activation()) {
      for (Eigen::Index j = 0; j < z.cols(); ++j) {
        for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = prelu(z(i, j), layer.slopes[i]);
      }
    }
    a = std::move(z);
  }
  act.output = std::move(a);
  return act;
}

}  // namespace detail

/// Batch forward pass; one input per row, one prediction per row.
inline Eigen::MatrixXd forward(const Network& net, const Eigen::MatrixXd& x) {
  return detail::run(net, x, false).output.transpose();
}

/// sqrt(sum ||yhat - y||^2) / sqrt(sum ||y||^2) over all rows.
inline double relative_l2(const Eigen::MatrixXd& preds, const Eigen::MatrixXd& targets) {
  require(preds.rows() == targets.rows() && preds.cols() == targets.cols(), ErrorKind::DimensionMismatch,
          "prediction and target shapes differ");
  const double denom = targets.squaredNorm();
  require(denom > 0.0, ErrorKind::ZeroTargetNorm, "targets have zero norm");
  return std::sqrt((preds - targets).squaredNorm()) / std::sqrt(denom);
}

/// Relative L2 data term plus theta * (sum of squared weights). Biases and
/// slopes are not penalized.
inline double loss(const Eigen::MatrixXd& preds, const Eigen::MatrixXd& targets, const Network& net, double theta) {
  return relative_l2(preds, targets) + theta * net.weight_sq_sum();
}

struct LossGradient {
  double loss = 0.0;
  double data_term = 0.0;
  Eigen::VectorXd gradient;  // aligned with Network::parameters()
};

/// Exact gradient of the regularized loss over the batch (x, y).
inline LossGradient backward(const Network& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double theta) {
  require(x.rows() > 0, ErrorKind::InvalidArgument, "backward needs a nonempty batch");
  require(y.rows() == x.rows() && y.cols() == net.spec.output_dim, ErrorKind::DimensionMismatch,
          "target shape does not match batch/network");
  const auto act = detail::run(net, x, true);
  const Eigen::MatrixXd diff = act.output - y.transpose();
  const double num = diff.squaredNorm();
  const double den = y.squaredNorm();
  require(den > 0.0, ErrorKind::ZeroTargetNorm, "targets in batch have zero norm");

  LossGradient out;
  out.data_term = std::sqrt(num) / std::sqrt(den);
  out.loss = out.data_term + theta * net.weight_sq_sum();
  out.gradient = Eigen::VectorXd::Zero(net.parameter_size());

  // d/dyhat sqrt(num)/sqrt(den) = diff / (sqrt(num) sqrt(den)); zero at the kink.
  Eigen::MatrixXd delta = num > 0.0 ? Eigen::MatrixXd(diff / (std::sqrt(num) * std::sqrt(den)))
                                    : Eigen::MatrixXd::Zero(diff.rows(), diff.cols());

  std::vector<Eigen::Index> offsets;
  Eigen::Index at = 0;
  for (const auto& l : net.layers) {
    offsets.push_back(at);
    at += l.weights.size() + l.bias.size() + l.slopes.size();
  }

  for (std::size_t li = net.layers.size(); li-- > 0;) {
    const Layer& layer = net.layers[li];
    const Eigen::MatrixXd& z = act.pre[li];
    Eigen::Index pos = offsets[li];
    const Eigen::Index w_size = layer.weights.size();
    const Eigen::Index b_size = layer.bias.size();
    if (layer.has_activation()) {
      // delta currently holds dL/d(activation); fold in the PReLU.
      Eigen::VectorXd d_slope = Eigen::VectorXd::Zero(layer.slopes.size());
      for (Eigen::Index j = 0; j < z.cols(); ++j) {
        for (Eigen::Index i = 0; i < z.rows(); ++i) {
          d_slope[i] += delta(i, j) * prelu_dslope(z(i, j));
          delta(i, j) *= prelu_dx(z(i, j), layer.slopes[i]);
        }
      }
      out.gradient.segment(pos + w_size + b_size, layer.slopes.size()) = d_slope;
    }
    Eigen::MatrixXd d_w = delta * act.inputs[li].transpose();
    d_w += 2.0 * theta * layer.weights;
    out.gradient.segment(pos, w_size) = d_w.reshaped();
    out.gradient.segment(pos + w_size, b_size) = delta.rowwise().sum();
    if (li > 0) delta = layer.weights.transpose() * delta;
  }
  return out;
}

}  // namespace kpodnn::nn
