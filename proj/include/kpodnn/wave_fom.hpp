#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "kpodnn/error.hpp"

namespace kpodnn::wave {

/// Gaussian pulse parameters and wave speed.
struct WaveParams {
  double amplitude = 1.0;  // A0
  double center = 2.0 * std::numbers::pi;  // x0
  double width = 0.75;  // sigma of the pulse
  double speed = 1.0;  // c

  void validate(double length) const {
    require(amplitude > 0.0, ErrorKind::InvalidArgument, "pulse amplitude must be positive");
    require(width > 0.0, ErrorKind::InvalidArgument, "pulse width must be positive");
    require(center > 0.0 && center < length, ErrorKind::InvalidArgument,
            "pulse center must lie strictly inside the domain");
    require(std::isfinite(speed), ErrorKind::InvalidArgument, "wave speed must be finite");
  }
};

struct GridSpec {
  double length = 4.0 * std::numbers::pi;
  double final_time = 52.0;
  int intervals = 256;
  // 1100 is the smallest multiple of 100 above the CFL minimum (1060) at the
  // defaults with c = 1.
  int time_steps = 1100;

  double dx() const { return length / intervals; }
  double dt() const { return final_time / time_steps; }
  int nodes() const { return intervals + 1; }

  void validate() const {
    require(intervals >= 2, ErrorKind::InvalidArgument, "grid needs at least 2 intervals");
    require(time_steps >= 1, ErrorKind::InvalidArgument, "grid needs at least 1 time step");
    require(length > 0.0 && final_time > 0.0, ErrorKind::InvalidArgument,
            "domain length and final time must be positive");
  }

  /// Smallest step count that satisfies the CFL bound for `speed` and is a
  /// multiple of `multiple_of` (so stored levels land on exact steps).
  static int stable_time_steps(double length, double final_time, int intervals, double speed,
                               int multiple_of = 1) {
    const double dx = length / intervals;
    int steps = static_cast<int>(std::ceil(final_time * std::abs(speed) / dx - 1e-12));
    steps = std::max(steps, 1);
    multiple_of = std::max(multiple_of, 1);
    return ((steps + multiple_of - 1) / multiple_of) * multiple_of;
  }
};

struct Trajectory {
  Eigen::MatrixXd states;  // nodes x stored levels
  Eigen::VectorXd times;
  WaveParams params;
};

inline double cfl_courant(double speed, const GridSpec& grid) {
  return std::abs(speed) * grid.dt() / grid.dx();
}

inline Eigen::VectorXd initial_pulse(const WaveParams& params, const GridSpec& grid) {
  grid.validate();
  const int n = grid.intervals;
  const double dx = grid.dx();
  const double two_var = 2.0 * params.width * params.width;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n + 1);
  for (int i = 1; i < n; ++i) {
    const double d = i * dx - params.center;
    u[i] = params.amplitude * std::exp(-d * d / two_var);
  }
  return u;
}

/// Leapfrog integration from an arbitrary initial state at rest. Boundary
/// entries of `u0` are overwritten with zero. Every `stride`-th level
/// (starting at level 0) is stored.
inline Trajectory solve_wave_from(const Eigen::VectorXd& u0_in, double speed, const GridSpec& grid,
                                  int stride = 1) {
  grid.validate();
  require(u0_in.size() == grid.nodes(), ErrorKind::DimensionMismatch,
          "initial state has " + std::to_string(u0_in.size()) + " entries, grid has " +
              std::to_string(grid.nodes()) + " nodes");
  require(stride >= 1, ErrorKind::InvalidArgument, "stride must be >= 1");
  const double courant = cfl_courant(speed, grid);
  if (courant > 1.0 + 1e-12) {
    fail(ErrorKind::CflViolation, "Courant number " + std::to_string(courant) +
                                      " exceeds 1; increase time_steps to at least " +
                                      std::to_string(GridSpec::stable_time_steps(
                                          grid.length, grid.final_time, grid.intervals, speed)));
  }

  const int n = grid.intervals;
  const int steps = grid.time_steps;
  const double c2 = courant * courant;
  const int stored = steps / stride + 1;

  Trajectory traj;
  traj.states.resize(n + 1, stored);
  traj.times.resize(stored);

  Eigen::VectorXd prev = u0_in;
  prev[0] = prev[n] = 0.0;
  traj.states.col(0) = prev;
  traj.times[0] = 0.0;
  int slot = 1;
  auto store = [&](int level, const Eigen::VectorXd& u) {
    if (level % stride == 0 && slot < stored) {
      traj.states.col(slot) = u;
      traj.times[slot] = level * grid.dt();
      ++slot;
    }
  };

  // Zero initial velocity: second-order Taylor start.
  Eigen::VectorXd cur = prev;
  for (int i = 1; i < n; ++i) {
    cur[i] = prev[i] + 0.5 * c2 * (prev[i + 1] - 2.0 * prev[i] + prev[i - 1]);
  }
  store(1, cur);

  Eigen::VectorXd next = Eigen::VectorXd::Zero(n + 1);
  for (int j = 1; j < steps; ++j) {
    for (int i = 1; i < n; ++i) {
      next[i] = c2 * (cur[i + 1] + cur[i - 1]) + 2.0 * (1.0 - c2) * cur[i] - prev[i];
    }
    prev.swap(cur);
    cur.swap(next);
    store(j + 1, cur);
  }
  return traj;
}

inline Trajectory solve_wave(const WaveParams& params, const GridSpec& grid, int stride = 1) {
  params.validate(grid.length);
  Trajectory traj = solve_wave_from(initial_pulse(params, grid), params.speed, grid, stride);
  traj.params = params;
  return traj;
}

}  // namespace kpodnn::wave
