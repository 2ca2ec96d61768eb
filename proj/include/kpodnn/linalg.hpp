#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "kpodnn/error.hpp"

namespace kpodnn::linalg {

struct QrResult {
  Eigen::MatrixXd q;  // m x r, orthonormal columns, r = min(m, k)
  Eigen::MatrixXd r;  // r x k, upper triangular with nonnegative diagonal
};

/// Reduced Householder QR. The sign convention diag(R) >= 0 makes Q unique
/// for full-column-rank input. The first j columns of Q depend only on the
/// first j columns of the input.
inline QrResult householder_qr(const Eigen::MatrixXd& a) {
  const Eigen::Index m = a.rows();
  const Eigen::Index k = a.cols();
  const Eigen::Index r = std::min(m, k);
  Eigen::MatrixXd work = a;
  Eigen::MatrixXd reflectors = Eigen::MatrixXd::Zero(m, r);

  for (Eigen::Index j = 0; j < r; ++j) {
    auto x = work.col(j).tail(m - j);
    const double norm_x = x.norm();
    if (norm_x == 0.0) continue;  // zero reflector, R(j,j) = 0
    Eigen::VectorXd v = x;
    v[0] += (x[0] >= 0.0 ? norm_x : -norm_x);
    v.normalize();
    auto trailing = work.bottomRightCorner(m - j, k - j);
    trailing.noalias() -= 2.0 * v * (v.transpose() * trailing);
    reflectors.col(j).tail(m - j) = v;
  }

  QrResult out;
  out.r = work.topRows(r).triangularView<Eigen::Upper>();
  out.q = Eigen::MatrixXd::Identity(m, r);
  for (Eigen::Index j = r - 1; j >= 0; --j) {
    auto v = reflectors.col(j).tail(m - j);
    auto block = out.q.bottomRows(m - j);
    block.noalias() -= 2.0 * v * (v.transpose() * block);
  }
  for (Eigen::Index j = 0; j < r; ++j) {
    if (out.r(j, j) < 0.0) {
      out.r.row(j) *= -1.0;
      out.q.col(j) *= -1.0;
    }
  }
  return out;
}

/// Flips each column so its largest-magnitude entry (first one on ties) is positive.
inline void normalize_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index arg = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

struct SymEigResult {
  Eigen::VectorXd values;   // all eigenvalues, descending
  Eigen::MatrixXd vectors;  // leading eigenvectors (n x k), unit norm, sign-normalized
};

inline double max_asymmetry(const Eigen::MatrixXd& a) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < a.rows(); ++i) worst = std::max(worst, std::abs(a(i, j) - a(j, i)));
  }
  return worst;
}

/// Symmetric eigendecomposition backed by LAPACK: one tridiagonal reduction,
/// all eigenvalues from the tridiagonal QL/QR iteration, and only the
/// `leading` largest eigenvectors via MRRR (inverse iteration as fallback),
/// back-transformed through the stored reflectors. `choose_leading` sees all
/// eigenvalues (descending) and returns how many eigenvectors to compute.
/// Takes the matrix by value since the reduction runs in place.
inline SymEigResult sym_eig(Eigen::MatrixXd a,
                            const std::function<Eigen::Index(const Eigen::VectorXd&)>& choose_leading) {
  const Eigen::Index n = a.rows();
  require(a.cols() == n, ErrorKind::DimensionMismatch, "sym_eig needs a square matrix");
  require(n >= 1, ErrorKind::InvalidArgument, "sym_eig needs a nonempty matrix");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  require(max_asymmetry(a) <= 1e-12 * scale, ErrorKind::InvalidArgument,
          "sym_eig input is not symmetric");
  const auto ln = static_cast<lapack_int>(n);

  SymEigResult out;
  if (n == 1) {
    out.values = Eigen::VectorXd::Constant(1, a(0, 0));
    out.vectors = Eigen::MatrixXd::Ones(1, std::clamp<Eigen::Index>(choose_leading(out.values), 0, 1));
    return out;
  }

  std::vector<double> diag(n), off(n), tau(n);
  lapack_int info = LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'L', ln, a.data(), ln, diag.data(), off.data(), tau.data());
  require(info == 0, ErrorKind::ConvergenceFailure, "dsytrd failed, info=" + std::to_string(info));

  std::vector<double> d = diag, e = off;
  info = LAPACKE_dsterf(ln, d.data(), e.data());
  require(info == 0, ErrorKind::ConvergenceFailure,
          "tridiagonal eigenvalue iteration did not converge, info=" + std::to_string(info));
  out.values.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out.values[i] = d[static_cast<std::size_t>(n - 1 - i)];

  const Eigen::Index k = std::clamp<Eigen::Index>(choose_leading(out.values), 0, n);
  if (k == 0) return out;

  const auto lk = static_cast<lapack_int>(k);
  Eigen::MatrixXd z(n, k);
  std::vector<double> w(n);
  lapack_int found = 0;
  {
    std::vector<double> d2 = diag, e2 = off;
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(k));
    lapack_logical tryrac = 1;
    info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', ln, d2.data(), e2.data(), 0.0, 0.0, ln - lk + 1, ln, &found,
                          w.data(), z.data(), ln, lk, support.data(), &tryrac);
  }
  if (info != 0 || found != lk) {
    std::vector<double> d2 = diag, e2 = off;
    std::vector<lapack_int> block(n), split(n), fail_idx(k);
    lapack_int nsplit = 0;
    info = LAPACKE_dstebz('I', 'B', ln, 0.0, 0.0, ln - lk + 1, ln, 0.0, d2.data(), e2.data(), &found, &nsplit,
                          w.data(), block.data(), split.data());
    require(info == 0 && found == lk, ErrorKind::ConvergenceFailure,
            "bisection for selected eigenvalues failed, info=" + std::to_string(info));
    info = LAPACKE_dstein(LAPACK_COL_MAJOR, ln, diag.data(), off.data(), lk, w.data(), block.data(), split.data(),
                          z.data(), ln, fail_idx.data());
    require(info == 0, ErrorKind::ConvergenceFailure,
            "inverse iteration failed for " + std::to_string(info) + " eigenvectors");
  }
  info = LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'L', 'N', ln, lk, a.data(), ln, tau.data(), z.data(), ln);
  require(info == 0, ErrorKind::ConvergenceFailure, "dormtr failed, info=" + std::to_string(info));

  // LAPACK returns ascending order; flip to descending.
  out.vectors = z.rowwise().reverse();
  for (Eigen::Index j = 0; j < k; ++j) out.vectors.col(j).normalize();
  normalize_signs(out.vectors);
  return out;
}

/// Pass leading < 0 for all eigenvectors, 0 for eigenvalues only.
inline SymEigResult sym_eig(Eigen::MatrixXd a, Eigen::Index leading = -1) {
  return sym_eig(std::move(a), [leading](const Eigen::VectorXd& values) {
    return leading < 0 ? values.size() : leading;
  });
}

/// sin of the largest principal angle between span(a) and span(b); both
/// arguments must have orthonormal columns.
inline double subspace_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  require(a.rows() == b.rows(), ErrorKind::DimensionMismatch, "subspace_distance row mismatch");
  const Eigen::MatrixXd residual = b - a * (a.transpose() * b);
  const Eigen::MatrixXd residual_t = a - b * (b.transpose() * a);
  const double s1 = residual.cols() ? Eigen::JacobiSVD<Eigen::MatrixXd>(residual).singularValues()(0) : 0.0;
  const double s2 = residual_t.cols() ? Eigen::JacobiSVD<Eigen::MatrixXd>(residual_t).singularValues()(0) : 0.0;
  return std::max(s1, s2);
}

inline double orthonormality_error(const Eigen::MatrixXd& v) {
  if (v.cols() == 0) return 0.0;
  return (v.transpose() * v - Eigen::MatrixXd::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff();
}

}  // namespace kpodnn::linalg
