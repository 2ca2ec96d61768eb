#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kpodnn/error.hpp"
#include "kpodnn/linalg.hpp"
#include "kpodnn/snapshots.hpp"

namespace kpodnn {

enum class ReductionMethod { Pod, Kpod };

inline std::string to_string(ReductionMethod m) { return m == ReductionMethod::Pod ? "POD" : "KPOD"; }

inline ReductionMethod method_from_string(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "pod") return ReductionMethod::Pod;
  if (s == "kpod") return ReductionMethod::Kpod;
  fail(ErrorKind::InvalidArgument, "unknown reduction method '" + s + "' (expected pod or kpod)");
}

struct KernelConfig {
  double gamma = 1e-10;

  void validate() const {
    require(gamma > 0.0 && std::isfinite(gamma), ErrorKind::InvalidArgument, "kernel gamma must be positive");
  }
};

/// Descending positive singular values (POD) or square roots of kernel
/// eigenvalues (KPOD). Values dropped as numerically nonpositive are only
/// counted.
struct Spectrum {
  Eigen::VectorXd sigmas;
  Eigen::Index discarded_count = 0;
};

struct ReducedBasis {
  Eigen::MatrixXd v;  // N_h x n, orthonormal columns
  Spectrum spectrum;
  ReductionMethod method = ReductionMethod::Pod;
  double eps_hat = 1e-12;
  std::optional<double> gamma;  // present iff KPOD
  // Rank demanded by the truncation criterion; n can be smaller when the
  // criterion asks for more modes than rank(S).
  Eigen::Index criterion_rank = 0;

  Eigen::Index dofs() const { return v.rows(); }
  Eigen::Index n() const { return v.cols(); }
};

/// Smallest n >= 1 with sum_{k>n} sigma_k^2 / sum_k sigma_k^2 <= eps_hat.
/// Tails are accumulated from the smallest value upward.
inline Eigen::Index truncation_rank(const Eigen::VectorXd& sigmas, double eps_hat) {
  require(sigmas.size() > 0, ErrorKind::InvalidArgument, "truncation_rank needs a nonempty spectrum");
  require(eps_hat > 0.0, ErrorKind::InvalidArgument, "eps_hat must be positive");
  const Eigen::Index count = sigmas.size();
  std::vector<double> tail(static_cast<std::size_t>(count) + 1, 0.0);
  for (Eigen::Index k = count - 1; k >= 0; --k) {
    tail[static_cast<std::size_t>(k)] = tail[static_cast<std::size_t>(k) + 1] + sigmas[k] * sigmas[k];
  }
  const double total = tail[0];
  for (Eigen::Index n = 1; n <= count; ++n) {
    if (tail[static_cast<std::size_t>(n)] <= eps_hat * total) return n;
  }
  return count;
}

/// RBF kernel matrix K_ij = exp(-gamma ||s_i - s_j||^2). Squared distances
/// come from the Gram matrix (lower triangle only, then mirrored) so the
/// result is exactly symmetric with a unit diagonal.
inline Eigen::MatrixXd kernel_matrix(const SnapshotMatrix& snaps, const KernelConfig& cfg) {
  cfg.validate();
  require(snaps.size() > 0, ErrorKind::InvalidArgument, "kernel_matrix needs at least one snapshot");
  const Eigen::Index ns = snaps.size();
  const Eigen::VectorXd sq = snaps.data.colwise().squaredNorm().transpose();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(ns, ns);
  k.selfadjointView<Eigen::Lower>().rankUpdate(snaps.data.transpose());
  for (Eigen::Index j = 0; j < ns; ++j) {
    k(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < ns; ++i) {
      const double dist2 = std::max(0.0, sq[i] + sq[j] - 2.0 * k(i, j));
      k(i, j) = std::exp(-cfg.gamma * dist2);
    }
  }
  k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
  return k;
}

/// Kernel matrix for an arbitrary symmetric kernel function.
inline Eigen::MatrixXd kernel_matrix(
    const SnapshotMatrix& snaps,
    const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>& kernel) {
  const Eigen::Index ns = snaps.size();
  Eigen::MatrixXd k(ns, ns);
  for (Eigen::Index j = 0; j < ns; ++j) {
    for (Eigen::Index i = j; i < ns; ++i) {
      k(i, j) = k(j, i) = kernel(snaps.data.col(i), snaps.data.col(j));
    }
  }
  return k;
}

namespace detail {

/// Eigenvalues at or below eps_mach * lambda_1 * N are round-off.
inline Eigen::Index positive_count(const Eigen::VectorXd& descending, Eigen::Index ns) {
  if (descending.size() == 0 || descending[0] <= 0.0) return 0;
  const double floor = std::numeric_limits<double>::epsilon() * descending[0] * static_cast<double>(ns);
  Eigen::Index kept = 0;
  while (kept < descending.size() && descending[kept] > floor) ++kept;
  return kept;
}

}  // namespace detail

/// Number of singular values above eps_mach * sigma_1 * max(N_h, N_s).
inline Eigen::Index numerical_rank(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0;
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s[0] <= 0.0) return 0;
  const double floor = std::numeric_limits<double>::epsilon() * s[0] * static_cast<double>(std::max(a.rows(), a.cols()));
  Eigen::Index r = 0;
  while (r < s.size() && s[r] > floor) ++r;
  return r;
}

/// Kernel spectrum only (no eigenvectors). Used for decay curves and rank sweeps.
inline Spectrum kpod_spectrum(const SnapshotMatrix& snaps, const KernelConfig& cfg) {
  const auto eig = linalg::sym_eig(kernel_matrix(snaps, cfg), 0);
  const Eigen::Index kept = detail::positive_count(eig.values, snaps.size());
  require(kept > 0, ErrorKind::DegenerateSpectrum, "kernel matrix has no positive eigenvalues");
  Spectrum s;
  s.sigmas = eig.values.head(kept).cwiseSqrt();
  s.discarded_count = eig.values.size() - kept;
  return s;
}

/// Kernel POD: kernel matrix, eigendecomposition, projected vectors
/// p_k = S w_k / sigma_k, reduced QR of P, first n columns of Q.
/// No kernel centering is applied.
inline ReducedBasis kpod_basis(const SnapshotMatrix& snaps, const KernelConfig& cfg, double eps_hat) {
  require(snaps.size() > 0 && snaps.dofs() > 0, ErrorKind::InvalidArgument, "kpod_basis needs a nonempty snapshot matrix");
  require(eps_hat > 0.0, ErrorKind::InvalidArgument, "eps_hat must be positive");
  const Eigen::Index ns = snaps.size();
  // Columns of Q beyond rank(S) would be arbitrary directions outside the snapshot span.
  const Eigen::Index max_rank = numerical_rank(snaps.data);
  require(max_rank > 0, ErrorKind::DegenerateSpectrum, "snapshot matrix is numerically zero");

  ReducedBasis basis;
  basis.method = ReductionMethod::Kpod;
  basis.eps_hat = eps_hat;
  basis.gamma = cfg.gamma;
  Eigen::Index n = 0;
  // The truncation rank is known once the eigenvalues are; only the leading
  // n eigenvectors are then computed.
  const auto eig = linalg::sym_eig(kernel_matrix(snaps, cfg), [&](const Eigen::VectorXd& values) {
    const Eigen::Index kept = detail::positive_count(values, ns);
    require(kept > 0, ErrorKind::DegenerateSpectrum, "kernel matrix has no positive eigenvalues");
    basis.spectrum.sigmas = values.head(kept).cwiseSqrt();
    basis.spectrum.discarded_count = ns - kept;
    basis.criterion_rank = truncation_rank(basis.spectrum.sigmas, eps_hat);
    n = std::min(basis.criterion_rank, max_rank);
    return n;
  });

  Eigen::MatrixXd p = snaps.data * eig.vectors;
  for (Eigen::Index j = 0; j < n; ++j) p.col(j) /= basis.spectrum.sigmas[j];
  basis.v = linalg::householder_qr(p).q.leftCols(n);
  return basis;
}

/// Linear POD through a thin SVD of the snapshot matrix.
inline ReducedBasis pod_basis(const SnapshotMatrix& snaps, double eps_hat) {
  require(snaps.size() > 0 && snaps.dofs() > 0, ErrorKind::InvalidArgument, "pod_basis needs a nonempty snapshot matrix");
  require(eps_hat > 0.0, ErrorKind::InvalidArgument, "eps_hat must be positive");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(snaps.data, Eigen::ComputeThinU);
  require(svd.info() == Eigen::Success, ErrorKind::ConvergenceFailure, "SVD of the snapshot matrix failed");
  const Eigen::VectorXd& s = svd.singularValues();
  const double floor = s.size() ? std::numeric_limits<double>::epsilon() * s[0] *
                                      static_cast<double>(std::max(snaps.dofs(), snaps.size()))
                                : 0.0;
  Eigen::Index kept = 0;
  while (kept < s.size() && s[kept] > floor) ++kept;
  require(kept > 0, ErrorKind::DegenerateSpectrum, "snapshot matrix is numerically zero");

  ReducedBasis basis;
  basis.method = ReductionMethod::Pod;
  basis.eps_hat = eps_hat;
  basis.spectrum.sigmas = s.head(kept);
  basis.spectrum.discarded_count = s.size() - kept;
  basis.criterion_rank = truncation_rank(basis.spectrum.sigmas, eps_hat);
  basis.v = svd.matrixU().leftCols(basis.criterion_rank);
  linalg::normalize_signs(basis.v);
  return basis;
}

/// POD through the eigendecomposition of the Gram matrix S^T S, with
/// v_k = S w_k / sigma_k. Kept as an independent route to cross-check
/// pod_basis.
inline ReducedBasis pod_basis_gram(const SnapshotMatrix& snaps, double eps_hat) {
  require(snaps.size() > 0 && snaps.dofs() > 0, ErrorKind::InvalidArgument, "pod_basis_gram needs a nonempty snapshot matrix");
  const Eigen::Index ns = snaps.size();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(ns, ns);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(snaps.data.transpose());
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  const auto eig = linalg::sym_eig(gram, -1);
  const Eigen::Index kept = detail::positive_count(eig.values, ns);
  require(kept > 0, ErrorKind::DegenerateSpectrum, "Gram matrix has no positive eigenvalues");

  ReducedBasis basis;
  basis.method = ReductionMethod::Pod;
  basis.eps_hat = eps_hat;
  basis.spectrum.sigmas = eig.values.head(kept).cwiseSqrt();
  basis.spectrum.discarded_count = ns - kept;
  basis.criterion_rank = truncation_rank(basis.spectrum.sigmas, eps_hat);
  const Eigen::Index n = std::min(basis.criterion_rank, snaps.dofs());
  basis.v = snaps.data * eig.vectors.leftCols(n);
  for (Eigen::Index j = 0; j < n; ++j) basis.v.col(j) /= basis.spectrum.sigmas[j];
  return basis;
}

inline ReducedBasis build_basis(const SnapshotMatrix& snaps, ReductionMethod method, double gamma, double eps_hat) {
  return method == ReductionMethod::Kpod ? kpod_basis(snaps, KernelConfig{gamma}, eps_hat)
                                         : pod_basis(snaps, eps_hat);
}

/// Reduced coefficients V^T u.
inline Eigen::VectorXd project(const ReducedBasis& basis, const Eigen::VectorXd& u) {
  require(u.size() == basis.dofs(), ErrorKind::DimensionMismatch,
          "vector of length " + std::to_string(u.size()) + " does not match basis with N_h = " +
              std::to_string(basis.dofs()));
  return basis.v.transpose() * u;
}

/// Full-order vector V c.
inline Eigen::VectorXd reconstruct(const ReducedBasis& basis, const Eigen::VectorXd& coeffs) {
  require(coeffs.size() == basis.n(), ErrorKind::DimensionMismatch,
          "coefficient vector of length " + std::to_string(coeffs.size()) + " does not match basis with n = " +
              std::to_string(basis.n()));
  return basis.v * coeffs;
}

struct SpectrumRow {
  Eigen::Index k = 0;  // 1-based
  double sigma_sq = 0.0;
  ReductionMethod method = ReductionMethod::Pod;
  std::optional<double> gamma;
};

/// Eigenvalue-decay table: POD singular values squared, then the kernel
/// eigenvalues for each gamma.
inline std::vector<SpectrumRow> spectrum_export(const SnapshotMatrix& snaps, bool include_pod,
                                                const std::vector<double>& gammas) {
  std::vector<SpectrumRow> rows;
  if (include_pod) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(snaps.data);
    const Eigen::VectorXd& s = svd.singularValues();
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      if (s[k] <= 0.0) break;
      rows.push_back({k + 1, s[k] * s[k], ReductionMethod::Pod, std::nullopt});
    }
  }
  for (double g : gammas) {
    const Spectrum spec = kpod_spectrum(snaps, KernelConfig{g});
    for (Eigen::Index k = 0; k < spec.sigmas.size(); ++k) {
      rows.push_back({k + 1, spec.sigmas[k] * spec.sigmas[k], ReductionMethod::Kpod, g});
    }
  }
  return rows;
}

}  // namespace kpodnn
