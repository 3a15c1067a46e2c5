#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "qgv/example_catalog.hpp"
#include "qgv/quadric_geometry.hpp"

using namespace qgv;

namespace {

const cplx I(0.0, 1.0);

// (a + i b)/sqrt2 for a random point a of anti-de Sitter space and a random
// unit timelike b orthogonal to it.
CVector random_lift(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> N;
  const double r = 0.5 * std::abs(N(rng)), t = N(rng);
  VectorXd w(n);
  for (int i = 0; i < n; ++i) w(i) = N(rng);
  w.normalize();
  VectorXd a(n + 2), v(n + 2);
  a << std::cosh(r) * std::cos(t), std::cosh(r) * std::sin(t), std::sinh(r) * w;
  do {
    v << -std::sin(t), std::cos(t), VectorXd::Zero(n);
    for (int i = 0; i < n + 2; ++i) v(i) += 0.2 * N(rng);
    v += ads_inner(v, a) * a;
  } while (ads_inner(v, v) > -0.1);
  v /= std::sqrt(-ads_inner(v, v));
  CVector z(n + 2);
  for (int i = 0; i < n + 2; ++i) z(i) = cplx(a(i), v(i)) / std::sqrt(2.0);
  return z;
}

HorizontalVector random_horizontal(std::mt19937_64& rng, const CVector& z) {
  std::normal_distribution<double> N;
  CVector w(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) w(i) = cplx(N(rng), N(rng));
  return horizontal_project(z, w);
}

CVector umbilic_lift(const VectorXd& u) {
  CVector z(u.size() + 2);
  z(0) = I;
  z.tail(u.size() + 1) = hyperbolic_chart(u).cast<cplx>();
  return z / std::sqrt(2.0);
}

}  // namespace

TEST(QuadricPoint, AcceptsLiftsRejectsOthers) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) EXPECT_NO_THROW(QuadricPoint::from_lift(random_lift(rng, 3)));
  // (a + i a)/sqrt2 is neither unit nor on the quadric
  VectorXd a(4);
  a << 1.0, 0.0, 0.0, 0.0;
  CVector bad = (a.cast<cplx>() + I * a.cast<cplx>()) / std::sqrt(2.0);
  EXPECT_THROW(QuadricPoint::from_lift(bad), InvariantError);
  EXPECT_THROW(QuadricPoint::from_lift(2.0 * random_lift(rng, 2)), InvariantError);
}

TEST(SamePoint, FiberAndDistinctClasses) {
  std::mt19937_64 rng(2);
  const CVector z = random_lift(rng, 3);
  const auto r = same_point(z, std::polar(1.0, 0.7) * z);
  EXPECT_TRUE(r.same);
  EXPECT_LE(r.residual, 1e-12);
  VectorXd u1(2), u2(2);
  u1 << 0.5, 0.3;
  u2 << 0.9, 0.3;
  EXPECT_FALSE(same_point(umbilic_lift(u1), umbilic_lift(u2)).same);
}

TEST(SamePoint, UmbilicGaussMapIndependentOfAlpha) {
  VectorXd u(2);
  u << 0.6, 1.1;
  std::vector<CVector> lifts;
  for (double alpha : {0.3, 0.9, 2.0}) {
    const auto e = make_entry(Family::umbilic, 2, alpha);
    const VectorXd a = detail::catalog_point(e, u);
    const VectorXd b = *closed_form_normal(e, u);
    CVector z(4);
    for (int i = 0; i < 4; ++i) z(i) = cplx(a(i), b(i)) / std::sqrt(2.0);
    lifts.push_back(z);
  }
  EXPECT_TRUE(same_point(lifts[0], lifts[1]).same);
  EXPECT_TRUE(same_point(lifts[0], lifts[2]).same);
  EXPECT_TRUE(same_point(lifts[0], umbilic_lift(u)).same);
}

TEST(HorizontalProject, IdempotentAndKillsVertical) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const CVector z = random_lift(rng, 3);
    const HorizontalVector X = random_horizontal(rng, z);
    EXPECT_LE(horizontality_residual(X), 1e-12);
    EXPECT_LE((horizontal_project(z, X.w).w - X.w).norm(), 1e-12);
    EXPECT_LE(horizontal_project(z, CVector(I * z)).w.norm(), 1e-12);
    EXPECT_LE(horizontal_project(z, CVector(z.conjugate())).w.norm(), 1e-12);
  }
}

TEST(QuadricMetric, LiftOfPrincipalDirection) {
  // (dG~)e = (1 - i lambda) e / sqrt2 for a unit principal direction e
  const double alpha = 0.8, lambda = 1.0 / std::tan(alpha);
  const auto e = make_entry(Family::umbilic, 2, alpha);
  const auto patch = instantiate(e);
  const VectorXd p = patch.domain().center();
  const auto sd = shape_operator(patch, p);
  const VectorXd eps = sd.da * sd.directions.col(0);
  EXPECT_NEAR(ads_inner(eps, eps), 1.0, 1e-9);
  CVector z(4);
  for (int i = 0; i < 4; ++i) z(i) = cplx(sd.a(i), sd.b(i)) / std::sqrt(2.0);
  const HorizontalVector X{z, cplx(1.0, -lambda) * eps.cast<cplx>() / std::sqrt(2.0)};
  EXPECT_LE(horizontality_residual(X), 1e-9);
  EXPECT_NEAR(quadric_metric(X, X), 0.5 * (1.0 + lambda * lambda), 1e-9);
}

TEST(QuadricMetric, JIsAnIsometryAndSkew) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 30; ++t) {
    const CVector z = random_lift(rng, 4);
    const auto X = random_horizontal(rng, z), Y = random_horizontal(rng, z);
    EXPECT_NEAR(quadric_metric(apply_J(X), apply_J(Y)), quadric_metric(X, Y), 1e-10);
    EXPECT_NEAR(quadric_metric(apply_J(X), Y), -quadric_metric(X, apply_J(Y)), 1e-10);
    EXPECT_NEAR(quadric_metric(X, apply_J(X)), 0.0, 1e-10);
    EXPECT_LE((apply_J(apply_J(X)).w + X.w).norm(), 1e-12);
  }
  const CVector z = random_lift(rng, 2);
  EXPECT_EQ(apply_J({z, CVector::Zero(4)}).w.norm(), 0.0);
}

TEST(QuadricMetric, DifferentBasesRejected) {
  std::mt19937_64 rng(5);
  const CVector z = random_lift(rng, 2), w = random_lift(rng, 2);
  EXPECT_THROW(quadric_metric(random_horizontal(rng, z), random_horizontal(rng, w)), ContractViolation);
}

TEST(StructureA, AlgebraOnRandomVectors) {
  std::mt19937_64 rng(6);
  for (double phi : {0.0, 0.4, 2.5}) {
    const GaugeAt g{phi};
    for (int t = 0; t < 20; ++t) {
      const CVector z = random_lift(rng, 3);
      const auto X = random_horizontal(rng, z), Y = random_horizontal(rng, z);
      EXPECT_LE((apply_A(g, apply_A(g, X)).w - X.w).norm(), 1e-10);
      EXPECT_LE((apply_A(g, apply_J(X)).w + apply_J(apply_A(g, X)).w).norm(), 1e-10);
      EXPECT_NEAR(quadric_metric(apply_A(g, X), Y), quadric_metric(X, apply_A(g, Y)), 1e-10);
      EXPECT_LE(horizontality_residual(apply_A(g, X)), 1e-10);
    }
  }
}

TEST(StructureA, RotationByPiNegates) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    const CVector z = random_lift(rng, 3);
    const auto X = random_horizontal(rng, z);
    EXPECT_LE((apply_A({std::numbers::pi}, X).w + apply_A({}, X).w).norm(), 1e-12);
  }
}

TEST(StructureA, UmbilicTangentsAreMinusOne) {
  VectorXd u(3);
  u << 0.5, 0.4, 1.0;
  const CVector z = umbilic_lift(u);
  const RealMap chart{[](const VectorXd& q) { return hyperbolic_chart(q); }, Box::uniform(3, 0.0, 2.0)};
  const Eigen::MatrixXd dp = jacobian(chart, u);
  for (int i = 0; i < 3; ++i) {
    CVector w = CVector::Zero(5);
    w.tail(4) = dp.col(i).cast<cplx>() / std::sqrt(2.0);
    const HorizontalVector X{z, w};
    EXPECT_LE(horizontality_residual(X), 1e-12);
    EXPECT_LE((apply_A({}, X).w + X.w).norm(), 1e-12);
  }
}

TEST(StructureA, ProductLiftEigenvalues) {
  // lift psi(i p, q)/sqrt2: tangents of the first factor are imaginary, so the
  // canonical A fixes them and negates the real tangents of the second factor
  const auto e = make_entry(Family::product, 2, 0.7, 1);
  VectorXd u(2);
  u << 0.6, 0.9;
  const CVector z = *closed_form_gauss_lift(e, u);
  CVector wp = CVector::Zero(4), wq = CVector::Zero(4);
  wp(0) = I * std::sinh(0.6);
  wp(2) = I * std::cosh(0.6);
  wq(1) = std::sinh(0.9);
  wq(3) = std::cosh(0.9);
  const HorizontalVector Xp{z, wp / std::sqrt(2.0)}, Xq{z, wq / std::sqrt(2.0)};
  EXPECT_LE(horizontality_residual(Xp), 1e-12);
  EXPECT_LE(horizontality_residual(Xq), 1e-12);
  EXPECT_LE((apply_A({}, Xp).w - Xp.w).norm(), 1e-12);
  EXPECT_LE((apply_A({}, Xq).w + Xq.w).norm(), 1e-12);
}

TEST(CurvatureQstar, Symmetries) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const CVector z = random_lift(rng, 3);
    const auto X = random_horizontal(rng, z), Y = random_horizontal(rng, z), Z = random_horizontal(rng, z),
               W = random_horizontal(rng, z);
    const GaugeAt g{0.3 * t};
    EXPECT_LE(curvature_Qstar(g, X, X, Z).w.norm(), 1e-10);
    EXPECT_NEAR(quadric_metric(curvature_Qstar(g, X, Y, Z), W) + quadric_metric(curvature_Qstar(g, Y, X, Z), W),
                0.0, 1e-9);
    // pair symmetry
    EXPECT_NEAR(quadric_metric(curvature_Qstar(g, X, Y, Z), W), quadric_metric(curvature_Qstar(g, Z, W, X), Y),
                1e-9);
    // first Bianchi identity
    const CVector bianchi =
        curvature_Qstar(g, X, Y, Z).w + curvature_Qstar(g, Y, Z, X).w + curvature_Qstar(g, Z, X, Y).w;
    EXPECT_LE(bianchi.norm(), 1e-9);
  }
}

// K(X, JX) is -2 for A-principal X, as on Q*^1 = H^2(-2), and -4 for
// A-isotropic X.
TEST(CurvatureQstar, HolomorphicSectional) {
  VectorXd u(2);
  u << 0.7, 0.2;
  const CVector z = umbilic_lift(u);
  const RealMap chart{[](const VectorXd& q) { return hyperbolic_chart(q); }, Box::uniform(2, 0.0, 2.0)};
  const Eigen::MatrixXd dp = jacobian(chart, u);
  std::vector<HorizontalVector> e;
  for (int i = 0; i < 2; ++i) {
    CVector w = CVector::Zero(4);
    w.tail(3) = dp.col(i).cast<cplx>();
    e.push_back({z, w});
  }
  // orthonormalize; both are A-eigenvectors with eigenvalue -1
  e[0] = (1.0 / std::sqrt(quadric_metric(e[0], e[0]))) * e[0];
  e[1] = e[1] - quadric_metric(e[1], e[0]) * e[0];
  e[1] = (1.0 / std::sqrt(quadric_metric(e[1], e[1]))) * e[1];
  for (const auto& X : e) ASSERT_LE((apply_A({}, X).w + X.w).norm(), 1e-10);

  auto K = [](const HorizontalVector& X) {
    const auto JX = apply_J(X);
    return quadric_metric(curvature_Qstar({}, X, JX, JX), X) / std::pow(quadric_metric(X, X), 2);
  };
  EXPECT_NEAR(K(e[0]), -2.0, 1e-10);
  const HorizontalVector iso = (1.0 / std::sqrt(2.0)) * (e[0] + apply_J(e[1]));
  EXPECT_NEAR(quadric_metric(apply_A({}, iso), iso), 0.0, 1e-10);
  EXPECT_NEAR(quadric_metric(apply_A({}, iso), apply_J(iso)), 0.0, 1e-10);
  EXPECT_NEAR(K(iso), -4.0, 1e-10);
}
