#pragma once

// Reference computations written independently of the library code paths.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

struct Eig {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // matching columns
};

// Cyclic Jacobi rotations on a symmetric matrix.
inline Eig jacobi(Eigen::MatrixXd a, double tol = 1e-15, int sweeps = 100) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol * std::max(1.0, a.norm())) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) > a(y, y); });
  Eig out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

// Sine of the largest principal angle between the column spans of two
// orthonormal matrices, from the smallest singular value of A^T B.
inline double max_angle_sine(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd m = a.transpose() * b;
  const Eig e = jacobi(m.transpose() * m);
  const double cos2 = std::clamp(e.values.minCoeff(), 0.0, 1.0);
  return std::sqrt(1.0 - cos2);
}

// Modified Gram-Schmidt orthonormal basis of the column span.
inline Eigen::MatrixXd gram_schmidt(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd q = a;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    for (Eigen::Index k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
    q.col(j).normalize();
  }
  return q;
}

inline double rbf(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double gamma) {
  double d2 = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
  return std::exp(-gamma * d2);
}

// Staggered leapfrog energy between levels j and j+1, conserved exactly by
// the scheme: kinetic term from the time difference, potential term from the
// product of neighbouring-level gradients.
inline double leapfrog_energy(const Eigen::VectorXd& u0, const Eigen::VectorXd& u1, double speed, double dt,
                              double dx) {
  double kinetic = 0.0, potential = 0.0;
  for (Eigen::Index i = 0; i < u0.size(); ++i) kinetic += (u1[i] - u0[i]) * (u1[i] - u0[i]);
  for (Eigen::Index i = 0; i + 1 < u0.size(); ++i) potential += (u0[i + 1] - u0[i]) * (u1[i + 1] - u1[i]);
  return kinetic / (dt * dt) + speed * speed * potential / (dx * dx);
}

// Energy proxy with the gradient taken at a single level.
inline double proxy_energy(const Eigen::VectorXd& u0, const Eigen::VectorXd& u1, double speed, double dt, double dx) {
  double kinetic = 0.0, potential = 0.0;
  for (Eigen::Index i = 0; i < u0.size(); ++i) kinetic += (u1[i] - u0[i]) * (u1[i] - u0[i]);
  for (Eigen::Index i = 0; i + 1 < u0.size(); ++i) potential += (u0[i + 1] - u0[i]) * (u0[i + 1] - u0[i]);
  return kinetic / (dt * dt) + speed * speed * potential / (dx * dx);
}

// Runs the three-level recurrence backwards from levels (N, N-1) to level 0.
inline Eigen::VectorXd reverse_leapfrog(const Eigen::VectorXd& last, const Eigen::VectorXd& before_last, double courant,
                                        int steps) {
  const double c2 = courant * courant;
  Eigen::VectorXd next = last, cur = before_last;
  for (int j = 0; j < steps - 1; ++j) {
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(cur.size());
    for (Eigen::Index i = 1; i + 1 < cur.size(); ++i) {
      prev[i] = c2 * (cur[i + 1] + cur[i - 1]) + 2.0 * (1.0 - c2) * cur[i] - next[i];
    }
    next = cur;
    cur = prev;
  }
  return cur;
}

// Central differences of a scalar function of a parameter vector.
inline Eigen::VectorXd central_gradient(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                                        double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace oracle
