#include <gtest/gtest.h>

#include <random>

#include "qgv/indefinite_linalg.hpp"

using namespace qgv;
using Eigen::MatrixXd;

namespace {

CVector hyperboloid_lift(double u, double v) {
  // (i, p)/sqrt2 with p = (cosh u, sinh u cos v, sinh u sin v)
  CVector z(4);
  z << cplx(0, 1), std::cosh(u), std::sinh(u) * std::cos(v), std::sinh(u) * std::sin(v);
  return z / std::sqrt(2.0);
}

}  // namespace

TEST(InnerReal, SingleSlots) {
  EXPECT_DOUBLE_EQ(inner_real({VectorXd::Unit(2, 0), 1}, {VectorXd::Unit(2, 0), 1}), -1.0);
  EXPECT_DOUBLE_EQ(inner_real({VectorXd::Unit(2, 1), 1}, {VectorXd::Unit(2, 1), 1}), 1.0);
}

TEST(InnerReal, IndexTwo) {
  VectorXd x(4), y(4);
  x << 1, 2, 3, 4;
  y << 4, 3, 2, 1;
  EXPECT_DOUBLE_EQ(inner_real({x, 2}, {y, 2}), 0.0);
  EXPECT_DOUBLE_EQ(ads_inner(x, y), 0.0);
}

TEST(InnerReal, MismatchIsContractViolation) {
  EXPECT_THROW(inner_real({VectorXd::Ones(3), 1}, {VectorXd::Ones(3), 2}), ContractViolation);
  EXPECT_THROW(inner_real({VectorXd::Ones(3), 1}, {VectorXd::Ones(4), 1}), ContractViolation);
  EXPECT_THROW(IndefVector(VectorXd::Ones(2), 3), ContractViolation);
}

TEST(InnerReal, SymmetricAndBilinear) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  for (int t = 0; t < 50; ++t) {
    VectorXd x(5), y(5), w(5);
    for (int i = 0; i < 5; ++i) x(i) = N(rng), y(i) = N(rng), w(i) = N(rng);
    const double a = N(rng);
    EXPECT_NEAR(inner_real({x, 2}, {y, 2}), inner_real({y, 2}, {x, 2}), 1e-12);
    EXPECT_NEAR(inner_real({VectorXd(x + a * w), 2}, {y, 2}),
                inner_real({x, 2}, {y, 2}) + a * inner_real({w, 2}, {y, 2}), 1e-10);
  }
}

TEST(HermitianForm, Examples) {
  CVector e0 = CVector::Zero(4);
  e0(0) = 1;
  EXPECT_EQ(hermitian_form(e0, e0), cplx(-1, 0));
  CVector ie0 = cplx(0, 1) * e0;
  EXPECT_EQ(hermitian_form(ie0, e0), cplx(0, -1));
  EXPECT_DOUBLE_EQ(hermitian_real(ie0, e0), 0.0);
  const CVector z = hyperboloid_lift(0.7, 1.3);
  EXPECT_NEAR(std::abs(hermitian_form(z, z) - cplx(-1, 0)), 0.0, 1e-14);
}

TEST(HermitianForm, SesquilinearAndHermitian) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N;
  auto rnd = [&] {
    CVector z(5);
    for (int i = 0; i < 5; ++i) z(i) = cplx(N(rng), N(rng));
    return z;
  };
  for (int t = 0; t < 50; ++t) {
    const CVector z = rnd(), w = rnd();
    const cplx c(N(rng), N(rng));
    EXPECT_NEAR(std::abs(hermitian_form(z, w) - std::conj(hermitian_form(w, z))), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(hermitian_form(c * z, w) - c * hermitian_form(z, w)), 0.0, 1e-11);
    EXPECT_NEAR(std::abs(hermitian_form(z, c * w) - std::conj(c) * hermitian_form(z, w)), 0.0, 1e-11);
    // Re h is the index-4 metric of the realification
    EXPECT_NEAR(hermitian_real(z, w), inner_real(realify(z), realify(w)), 1e-11);
  }
}

TEST(QuadricResidual, Examples) {
  EXPECT_NEAR(std::abs(quadric_residual(hyperboloid_lift(0.4, 2.0))), 0.0, 1e-14);
  CVector z = CVector::Zero(4);
  z(0) = 1;
  z(3) = 1;
  EXPECT_EQ(quadric_residual(z), cplx(0, 0));
  z(3) = 0;
  EXPECT_EQ(quadric_residual(z), cplx(-1, 0));
  EXPECT_THROW(quadric_residual(CVector::Zero(2)), ContractViolation);
}

TEST(GSelfAdjointEigen, Identity) {
  const auto r = g_selfadjoint_eigen({MatrixXd::Identity(3, 3), MatrixXd::Identity(3, 3)});
  EXPECT_TRUE(r.values.isApprox(VectorXd::Ones(3)));
}

TEST(GSelfAdjointEigen, ScaledMetric) {
  MatrixXd G = 2.0 * MatrixXd::Identity(2, 2);
  MatrixXd S = Eigen::Vector2d(2, 6).asDiagonal();
  const auto r = g_selfadjoint_eigen({G, S});
  EXPECT_NEAR(r.values(0), 2.0, 1e-12);
  EXPECT_NEAR(r.values(1), 6.0, 1e-12);
  EXPECT_NEAR(std::abs(r.vectors(0, 0)), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(std::abs(r.vectors(1, 1)), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_TRUE((r.vectors.transpose() * G * r.vectors).isApprox(MatrixXd::Identity(2, 2), 1e-12));
}

TEST(GSelfAdjointEigen, RandomReconstruction) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N;
  for (int t = 0; t < 20; ++t) {
    MatrixXd M(4, 4), K(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) M(i, j) = N(rng), K(i, j) = N(rng);
    const MatrixXd G = M * M.transpose() + 4.0 * MatrixXd::Identity(4, 4);
    const MatrixXd Pi = K + K.transpose();
    const MatrixXd S = G.inverse() * Pi;  // G-self-adjoint
    const auto r = g_selfadjoint_eigen({G, S});
    const MatrixXd rec = r.vectors * r.values.asDiagonal() * r.vectors.inverse();
    EXPECT_LE((S - rec).cwiseAbs().maxCoeff(), 1e-10);
    for (int i = 1; i < 4; ++i) EXPECT_LE(r.values(i - 1), r.values(i));
  }
}

TEST(GSelfAdjointEigen, Errors) {
  MatrixXd G = MatrixXd::Identity(2, 2);
  G(1, 1) = -1;
  EXPECT_THROW(g_selfadjoint_eigen({G, MatrixXd::Identity(2, 2)}), SignatureError);
  MatrixXd S(2, 2);
  S << 1, 2, 0, 1;
  EXPECT_THROW(g_selfadjoint_eigen({MatrixXd::Identity(2, 2), S}), ContractViolation);
  EXPECT_THROW(g_selfadjoint_eigen({MatrixXd::Identity(2, 2), MatrixXd::Identity(3, 3)}), ContractViolation);
}
