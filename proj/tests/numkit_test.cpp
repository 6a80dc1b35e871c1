#include "laycon/numkit.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace laycon::numkit {
namespace {

using testing::Gen;

Eigen::Matrix2d companion(double k1, double k2) {
  Eigen::Matrix2d a;
  a << 0.0, 1.0, -k1, -k2;
  return a;
}

TEST(Lyapunov, NegativeIdentity) {
  const SpdMatrix p = solve_lyapunov(-Eigen::Matrix2d::Identity(), 2.0 * Eigen::Matrix2d::Identity());
  EXPECT_TRUE(p.matrix().isApprox(Eigen::Matrix2d::Identity(), 1e-14));
}

TEST(Lyapunov, ScenarioAGains) {
  const SpdMatrix p = solve_lyapunov(companion(25, 11), Eigen::Vector2d(50, 1).asDiagonal().toDenseMatrix());
  EXPECT_NEAR(p(0, 0), 14.41, 0.01);
  EXPECT_NEAR(p(0, 1), 1.00, 0.01);
  EXPECT_NEAR(p(1, 0), 1.00, 0.01);
  EXPECT_NEAR(p(1, 1), 0.14, 0.01);
}

TEST(Lyapunov, MatchesKroneckerSystem) {
  Gen gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = gen.integer(1, 5);
    const Eigen::MatrixXd a = gen.hurwitz(n);
    const Eigen::MatrixXd r = gen.spd(n);
    const SpdMatrix p = solve_lyapunov(a, r);
    const Eigen::MatrixXd oracle = testing::kron_lyapunov(a, r);
    EXPECT_LE((p.matrix() - oracle).cwiseAbs().maxCoeff(), 1e-9 * (1.0 + oracle.norm()));
    const Eigen::MatrixXd res = a.transpose() * p.matrix() + p.matrix() * a + r;
    EXPECT_LE(res.cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Lyapunov, WorksWithLongDouble) {
  using M = Eigen::Matrix<long double, 2, 2>;
  M a;
  a << 0, 1, -35, -12;
  M r = M::Zero();
  r(0, 0) = 100;
  r(1, 1) = 10;
  const auto p = solve_lyapunov(a, r);
  const M res = a.transpose() * p.matrix() + p.matrix() * a + r;
  EXPECT_LE(static_cast<double>(res.cwiseAbs().maxCoeff()), 1e-12);
}

TEST(Lyapunov, Errors) {
  EXPECT_THROW(solve_lyapunov(Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity()), NotHurwitz);
  EXPECT_THROW(solve_lyapunov(-Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3)),
               DimensionError);
  EXPECT_THROW(solve_lyapunov(-Eigen::MatrixXd::Identity(9, 9), Eigen::MatrixXd::Identity(9, 9)),
               DimensionError);
  Eigen::Matrix2d not_sym;
  not_sym << 1, 2, 0, 1;
  EXPECT_THROW(solve_lyapunov(-Eigen::Matrix2d::Identity(), not_sym), NotSymmetric);
  EXPECT_THROW(solve_lyapunov(-Eigen::Matrix2d::Identity(), -Eigen::Matrix2d::Identity()),
               NotPositiveDefinite);
}

TEST(SymEigen, Diagonal) {
  const auto eig = sym_eigen(Eigen::Vector3d(1, 2, 3).asDiagonal().toDenseMatrix());
  EXPECT_TRUE(eig.values.isApprox(Eigen::Vector3d(1, 2, 3)));
  EXPECT_TRUE(eig.vectors.cwiseAbs().isApprox(Eigen::Matrix3d::Identity()));
}

TEST(SymEigen, PublishedConditionNumber) {
  Eigen::Matrix2d p;
  p << 14.409, 1, 1, 0.1364;
  EXPECT_NEAR(SpdMatrix(p).condition_number(), 217.0, 3.0);
}

TEST(SymEigen, TwoByTwoMatchesCharacteristicPolynomial) {
  Gen gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Matrix2d s = gen.symmetric(2);
    const auto eig = sym_eigen(s);
    const Eigen::Vector2d oracle = testing::charpoly_eig2(s);
    EXPECT_NEAR(eig.values(0), oracle(0), 1e-12);
    EXPECT_NEAR(eig.values(1), oracle(1), 1e-12);
  }
}

TEST(SymEigen, FourByFourMatchesDeflation) {
  Gen gen(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd s = gen.symmetric(4);
    const auto eig = sym_eigen(s);
    const auto oracle = testing::deflation_eigs(s, static_cast<std::uint64_t>(trial));
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(eig.values(i), oracle[static_cast<std::size_t>(i)], 1e-9);
    // Eigenvectors are orthonormal and diagonalize.
    EXPECT_TRUE((eig.vectors.transpose() * eig.vectors).isApprox(Eigen::Matrix4d::Identity(), 1e-12));
    const Eigen::MatrixXd d = eig.vectors.transpose() * s * eig.vectors;
    EXPECT_LE((d - Eigen::MatrixXd(eig.values.asDiagonal())).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Eigenvalues, PublishedCompanionForms) {
  const auto a = eigenvalues(companion(25, 11));
  std::vector<double> re{a(0).real(), a(1).real()};
  std::sort(re.begin(), re.end());
  EXPECT_NEAR(re[0], -7.79, 0.01);
  EXPECT_NEAR(re[1], -3.21, 0.01);
  EXPECT_NEAR(decay_rate(companion(25, 11)), 3.21, 0.01);

  const auto b = eigenvalues(companion(35, 12));
  std::vector<double> rb{b(0).real(), b(1).real()};
  std::sort(rb.begin(), rb.end());
  EXPECT_NEAR(rb[0], -7.0, 1e-9);
  EXPECT_NEAR(rb[1], -5.0, 1e-9);
  EXPECT_NEAR(decay_rate(companion(35, 12)), 5.0, 1e-9);
}

TEST(Eigenvalues, DecayRate) {
  EXPECT_DOUBLE_EQ(decay_rate(-2.0 * Eigen::Matrix3d::Identity()), 2.0);
  EXPECT_THROW(decay_rate(companion(-1, 1)), NotHurwitz);
  EXPECT_TRUE(is_hurwitz(companion(1, 1)));
  EXPECT_FALSE(is_hurwitz(companion(1, 0)));
}

TEST(InvertSpd, Identity) {
  EXPECT_TRUE(invert_spd(SpdMatrix(Eigen::Matrix3d::Identity())).matrix().isApprox(Eigen::Matrix3d::Identity()));
}

TEST(InvertSpd, MatchesAdjugate) {
  const SpdMatrix p = solve_lyapunov(companion(25, 11), Eigen::Vector2d(50, 1).asDiagonal().toDenseMatrix());
  const Eigen::Matrix2d oracle = testing::adjugate_inverse(p.matrix());
  const SpdMatrix inv = invert_spd(p);
  EXPECT_NEAR(inv(0, 0), 0.141, 0.002);
  EXPECT_LE((inv.matrix() - oracle).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(inverse_quad_form(p, Eigen::Vector2d(1, 0)), oracle(0, 0), 1e-12);
}

TEST(InvertSpd, RoundTrip) {
  Gen gen(9);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd m = gen.spd(3);
    const SpdMatrix inv = invert_spd(SpdMatrix(m));
    EXPECT_TRUE((inv.matrix() * m).isApprox(Eigen::Matrix3d::Identity(), 1e-10));
  }
}

}  // namespace
}  // namespace laycon::numkit
