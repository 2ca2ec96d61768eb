#include <gtest/gtest.h>

#include "kpodnn/linalg.hpp"
#include "oracles.hpp"

using namespace kpodnn;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::srand(seed);
  return Eigen::MatrixXd::Random(rows, cols);
}

Eigen::MatrixXd random_symmetric(Eigen::Index n, unsigned seed) {
  const Eigen::MatrixXd a = random_matrix(n, n, seed);
  return a + a.transpose();
}

}  // namespace

TEST(HouseholderQr, ReconstructsAndIsOrthonormal) {
  const Eigen::MatrixXd a = random_matrix(40, 12, 1);
  const auto qr = linalg::householder_qr(a);
  ASSERT_EQ(qr.q.rows(), 40);
  ASSERT_EQ(qr.q.cols(), 12);
  EXPECT_LE((qr.q * qr.r - a).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LE(linalg::orthonormality_error(qr.q), 1e-14);
  for (Eigen::Index j = 0; j < 12; ++j) {
    EXPECT_GE(qr.r(j, j), 0.0);
    for (Eigen::Index i = j + 1; i < 12; ++i) EXPECT_EQ(qr.r(i, j), 0.0);
  }
}

TEST(HouseholderQr, MatchesGramSchmidtWithPositiveDiagonal) {
  const Eigen::MatrixXd a = random_matrix(25, 8, 2);
  const auto qr = linalg::householder_qr(a);
  EXPECT_LE((qr.q - oracle::gram_schmidt(a)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(HouseholderQr, LeadingColumnsDependOnlyOnLeadingInput) {
  const Eigen::MatrixXd a = random_matrix(30, 10, 3);
  const auto full = linalg::householder_qr(a);
  const auto head = linalg::householder_qr(a.leftCols(4));
  EXPECT_LE((full.q.leftCols(4) - head.q).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(HouseholderQr, WideAndZeroColumns) {
  const Eigen::MatrixXd wide = random_matrix(3, 7, 4);
  const auto qr = linalg::householder_qr(wide);
  EXPECT_EQ(qr.q.cols(), 3);
  EXPECT_EQ(qr.r.cols(), 7);
  EXPECT_LE((qr.q * qr.r - wide).cwiseAbs().maxCoeff(), 1e-13);

  Eigen::MatrixXd z = random_matrix(6, 3, 5);
  z.col(1).setZero();
  const auto qz = linalg::householder_qr(z);
  EXPECT_LE((qz.q * qz.r - z).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LE(linalg::orthonormality_error(qz.q), 1e-14);
}

TEST(SymEig, ValuesMatchJacobi) {
  const Eigen::MatrixXd a = random_symmetric(30, 6);
  const auto lib = linalg::sym_eig(a);
  const auto ref = oracle::jacobi(a);
  EXPECT_LE((lib.values - ref.values).cwiseAbs().maxCoeff(), 1e-12);
  for (Eigen::Index i = 1; i < lib.values.size(); ++i) EXPECT_GE(lib.values[i - 1], lib.values[i]);
}

TEST(SymEig, VectorsSatisfyEigenEquation) {
  const Eigen::MatrixXd a = random_symmetric(25, 7);
  const auto lib = linalg::sym_eig(a);
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    EXPECT_LE((a * lib.vectors.col(j) - lib.values[j] * lib.vectors.col(j)).norm(), 1e-12);
  }
  EXPECT_LE(linalg::orthonormality_error(lib.vectors), 1e-12);
  const auto ref = oracle::jacobi(a);
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    EXPECT_NEAR(std::abs(lib.vectors.col(j).dot(ref.vectors.col(j))), 1.0, 1e-10);
  }
}

TEST(SymEig, ChooserSeesAllValuesAndLimitsVectors) {
  const Eigen::MatrixXd a = random_symmetric(20, 8);
  Eigen::Index seen = 0;
  const auto lib = linalg::sym_eig(a, [&](const Eigen::VectorXd& values) {
    seen = values.size();
    return Eigen::Index{3};
  });
  EXPECT_EQ(seen, 20);
  EXPECT_EQ(lib.vectors.cols(), 3);
  const auto all = linalg::sym_eig(a);
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_LE((lib.vectors.col(j) - all.vectors.col(j)).norm(), 1e-10);
  EXPECT_EQ(linalg::sym_eig(a, 0).vectors.cols(), 0);
}

TEST(SymEig, SignConventionLargestEntryPositive) {
  const auto lib = linalg::sym_eig(random_symmetric(15, 9));
  for (Eigen::Index j = 0; j < lib.vectors.cols(); ++j) {
    Eigen::Index arg = 0;
    lib.vectors.col(j).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(lib.vectors(arg, j), 0.0);
  }
}

TEST(SymEig, DiagonalAndScalar) {
  const Eigen::Vector4d d(1.0, 4.0, -2.0, 3.0);
  const auto lib = linalg::sym_eig(Eigen::MatrixXd(d.asDiagonal()));
  EXPECT_EQ(lib.values, Eigen::Vector4d(4.0, 3.0, 1.0, -2.0));
  EXPECT_NEAR(lib.vectors(1, 0), 1.0, 1e-15);
  const auto one = linalg::sym_eig(Eigen::MatrixXd::Constant(1, 1, 2.5));
  EXPECT_EQ(one.values[0], 2.5);
  EXPECT_EQ(one.vectors(0, 0), 1.0);
}

TEST(SymEig, RejectsNonSymmetricAndNonSquare) {
  Eigen::MatrixXd a = random_symmetric(5, 10);
  a(0, 3) += 1e-6;
  EXPECT_THROW(linalg::sym_eig(a), Error);
  EXPECT_THROW(linalg::sym_eig(Eigen::MatrixXd::Zero(3, 4)), Error);
}

TEST(SubspaceDistance, MatchesPrincipalAngleOracle) {
  const Eigen::MatrixXd a = oracle::gram_schmidt(random_matrix(20, 4, 11));
  const Eigen::MatrixXd b = oracle::gram_schmidt(a + 0.05 * random_matrix(20, 4, 12));
  const double lib = linalg::subspace_distance(a, b);
  EXPECT_NEAR(lib, oracle::max_angle_sine(a, b), 1e-10);
  EXPECT_GT(lib, 0.0);
}

TEST(SubspaceDistance, InvariantToRotationWithinSpan) {
  const Eigen::MatrixXd a = oracle::gram_schmidt(random_matrix(12, 3, 13));
  const Eigen::MatrixXd rot = oracle::gram_schmidt(random_matrix(3, 3, 14));
  EXPECT_LE(linalg::subspace_distance(a, a * rot), 1e-14);
  Eigen::MatrixXd e1 = Eigen::MatrixXd::Zero(12, 1), e2 = Eigen::MatrixXd::Zero(12, 1);
  e1(0, 0) = 1.0;
  e2(1, 0) = 1.0;
  EXPECT_NEAR(linalg::subspace_distance(e1, e2), 1.0, 1e-15);
}
