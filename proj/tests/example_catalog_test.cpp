#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "qgv/example_catalog.hpp"

using namespace qgv;
using std::numbers::pi;

namespace {

const std::vector<Family> kFamilies{Family::umbilic, Family::product, Family::rotation_sig_plus_minus,
                                    Family::rotation_sig_minus_minus, Family::rotation_sig_minus_null};

std::vector<double> samples(double lo, double hi, int k = 20) {
  std::vector<double> s;
  for (int i = 0; i <= k; ++i) s.push_back(lo + (hi - lo) * i / k);
  return s;
}

RealMap profile_curve(const Profile& p, double lo, double hi, double scale = 1.0) {
  return {[p, scale](const VectorXd& x) { return VectorXd(p(scale * x(0)).v); }, Box::uniform(1, lo, hi)};
}

}  // namespace

TEST(Families, NamesRoundTrip) {
  for (auto f : kFamilies) EXPECT_EQ(parse_family(family_id(f)), f);
  EXPECT_THROW(parse_family("torus"), ConfigError);
  EXPECT_TRUE(is_rotation(Family::rotation_sig_minus_null));
  EXPECT_FALSE(is_rotation(Family::product));
}

TEST(Instantiate, UmbilicPoint) {
  const auto e = make_entry(Family::umbilic, 2, pi / 4, 1, std::nullopt,
                            Box{Eigen::Vector2d(0.2, 0.5), Eigen::Vector2d(1.0, 1.5)});
  const auto patch = instantiate(e);
  const VectorXd a = patch.chart(Eigen::Vector2d(0.5, 1.0));
  const double r = std::sqrt(2.0) / 2;
  EXPECT_NEAR(a(0), r, 1e-15);
  EXPECT_NEAR(a(1), r * std::cosh(0.5), 1e-15);
  EXPECT_NEAR(a(2), r * std::sinh(0.5) * std::cos(1.0), 1e-15);
  EXPECT_NEAR(a(3), r * std::sinh(0.5) * std::sin(1.0), 1e-15);
  EXPECT_NEAR(ads_inner(a, a), -1.0, 1e-14);
}

TEST(Instantiate, AllFamiliesOnAntiDeSitter) {
  for (auto f : kFamilies)
    for (int n : {2, 3, 4}) {
      const auto patch = instantiate(make_entry(f, n, pi / 4, 1));
      EXPECT_LE(check_patch(patch, grid_points(patch.domain(), 3)), 1e-12) << family_id(f) << " n=" << n;
    }
}

TEST(Instantiate, ProductInterleaving) {
  VectorXd p(2), q(3);
  p << 1, 2;
  q << 10, 20, 30;
  VectorXd expect(5);
  expect << 1, 10, 2, 20, 30;
  EXPECT_EQ(detail::interleave(p, q), expect);
}

TEST(Profiles, ConstantGSatisfiesConstraints) {
  const auto r = profile_residuals(Family::rotation_sig_plus_minus, profiles::constant_g(), samples(-2, 2));
  EXPECT_LE(r.on_quadric, 1e-13);
  EXPECT_LE(r.unit_speed, 1e-13);
}

TEST(Profiles, ClosedFormProfilesSatisfyConstraints) {
  const std::vector<std::pair<Family, Profile>> cases{
      {Family::rotation_sig_plus_minus, profiles::sine(0.6)},
      {Family::rotation_sig_minus_minus, profiles::sinh_profile(1.7)},
      {Family::rotation_sig_minus_null, profiles::null_sine(0.9)},
      {Family::rotation_sig_minus_null, profiles::null_geodesic(1.2, 0.3)}};
  for (const auto& [f, prof] : cases) {
    const auto r = profile_residuals(f, prof, samples(0.2, 1.4));
    EXPECT_LE(r.on_quadric, 1e-12) << prof.kind;
    EXPECT_LE(r.unit_speed, 1e-12) << prof.kind;
    EXPECT_LE(r.null_identity, 1e-11) << prof.kind;
    // second derivatives agree with finite differences of the first
    for (double s : {0.5, 1.0}) {
      const Eigen::Vector3d fd = (prof(s + 1e-5).d1 - prof(s - 1e-5).d1) / 2e-5;
      EXPECT_LE((fd - prof(s).d2).cwiseAbs().maxCoeff(), 1e-6) << prof.kind;
    }
  }
}

TEST(Profiles, ConstraintViolationRejected) {
  Profile bad{"curve", {}, [](double s) { return ProfileJet{{1.0, 0.5, s}, {0.0, 0.0, 1.0}, {0, 0, 0}}; }};
  EXPECT_THROW(make_entry(Family::rotation_sig_plus_minus, 2, pi / 4, 1, bad), ConstraintError);
  EXPECT_THROW(profiles::sinh_profile(0.5), ConstraintError);
  EXPECT_THROW(profiles::sine(-1.0), ConstraintError);
}

TEST(Profiles, FromCurveMatchesClosedForm) {
  const Profile exact = profiles::sinh_profile(1.5);
  const Profile fd = profiles::from_curve(profile_curve(exact, 0.0, 2.0));
  for (double s : {0.5, 1.2}) {
    EXPECT_LE((fd(s).d1 - exact(s).d1).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((fd(s).d2 - exact(s).d2).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(ArcLength, UnitSpeedIsIdentity) {
  const Profile p = profiles::constant_g();
  const RealMap r = arc_length_reparametrize(profile_curve(p, 0.0, 2.0),
                                             profile_metric(Family::rotation_sig_plus_minus), 0.0);
  for (double s : {0.3, 0.9, 1.7}) EXPECT_LE((r(VectorXd::Constant(1, s)) - p(s).v).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ArcLength, RecoversScaledParameter) {
  // sigma -> c(2 sigma) has speed 2; its arc-length form is c itself
  const Profile p = profiles::constant_g();
  const RealMap r = arc_length_reparametrize(profile_curve(p, 0.0, 1.0, 2.0),
                                             profile_metric(Family::rotation_sig_plus_minus), 0.0);
  EXPECT_NEAR(r.domain.hi(0), 2.0 * (1.0 - 2e-3), 1e-8);
  const Profile q = profiles::from_curve(r, {1e-2, 4, false});
  for (double s : {0.4, 1.0, 1.5}) {
    EXPECT_LE((q(s).v - p(s).v).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(q(s).d1.dot(profile_metric(Family::rotation_sig_plus_minus) * q(s).d1), 1.0, 1e-7);
  }
}

TEST(ArcLength, NullConstraintPreserved) {
  // slow the null sine curve down by sigma -> sigma^2 + sigma/2 and recover arc length
  const Profile p = profiles::null_sine(0.7);
  const RealMap slow{[p](const VectorXd& x) {
                       const double t = x(0) * x(0) + 0.5 * x(0);
                       return VectorXd(p(t).v);
                     },
                     Box::uniform(1, 0.3, 1.2)};
  const auto M = profile_metric(Family::rotation_sig_minus_null);
  const RealMap r = arc_length_reparametrize(slow, M);
  const Profile q = profiles::from_curve(r, {2e-3, 4, false});
  std::vector<double> s;
  for (int i = 1; i < 8; ++i) s.push_back(r.domain.lo(0) + 0.05 + (r.domain.hi(0) - r.domain.lo(0) - 0.1) * i / 8.0);
  const auto res = profile_residuals(Family::rotation_sig_minus_null, q, s);
  EXPECT_LE(res.on_quadric, 1e-9);
  EXPECT_LE(res.unit_speed, 1e-7);
  EXPECT_LE(res.null_identity, 1e-7);
}

TEST(ArcLength, VanishingSpeedIsRegularityError) {
  const RealMap still{[](const VectorXd&) { return VectorXd(Eigen::Vector3d(1.0, 0.0, 0.0)); },
                      Box::uniform(1, 0.0, 1.0)};
  EXPECT_THROW(arc_length_reparametrize(still, profile_metric(Family::rotation_sig_plus_minus)), RegularityError);
}

TEST(Golden, ClosedFormConstants) {
  const VectorXd u = Eigen::Vector3d(0.5, 0.6, 0.7);
  const VectorXd um = golden_lambdas(make_entry(Family::umbilic, 3, pi / 3), u);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(um(i), 1.0 / std::sqrt(3.0), 1e-15);
  const VectorXd pr = golden_lambdas(make_entry(Family::product, 3, pi / 4, 1), u);
  EXPECT_NEAR(pr(0), -1.0, 1e-15);
  EXPECT_NEAR(pr(1), 1.0, 1e-15);
  EXPECT_NEAR(pr(2), 1.0, 1e-15);
  // g = 1/2: lambda_1 = 1/sqrt3 and lambda_j = -sqrt3
  const VectorXd rot = golden_lambdas(make_entry(Family::rotation_sig_plus_minus, 3), u);
  EXPECT_NEAR(rot(0), 1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(rot(1), -std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(rot(2), -std::sqrt(3.0), 1e-12);
}

TEST(Golden, RotationProductRule) {
  // lambda_1 lambda_j = (x'' - x)/x for the profile coordinate x that scales
  // the orbit (g, h and h respectively)
  const VectorXd u = Eigen::Vector2d(0.8, 0.5);
  {
    const auto e = make_entry(Family::rotation_sig_plus_minus, 2, pi / 4, 1, profiles::sine(0.7));
    const VectorXd l = golden_lambdas(e, u);
    const auto j = e.profile(0.8);
    EXPECT_NEAR(l(0) * l(1), (j.d2(1) - j.v(1)) / j.v(1), 1e-12);
  }
  for (auto [f, prof] : {std::pair{Family::rotation_sig_minus_minus, profiles::sinh_profile(1.5)},
                         std::pair{Family::rotation_sig_minus_null, profiles::null_sine(0.7)},
                         std::pair{Family::rotation_sig_minus_null, profiles::null_geodesic(1.2, 0.3)}}) {
    const auto e = make_entry(f, 2, pi / 4, 1, prof);
    const VectorXd l = golden_lambdas(e, u);
    const auto j = e.profile(0.8);
    EXPECT_NEAR(l(0) * l(1), (j.d2(2) - j.v(2)) / j.v(2), 1e-12) << prof.kind;
  }
  // geodesic profile: lambda_1 = 0
  const auto eg = make_entry(Family::rotation_sig_minus_null, 2, pi / 4, 1, profiles::null_geodesic(1.2, 0.3));
  EXPECT_NEAR(golden_lambdas(eg, u)(0), 0.0, 1e-12);
}

TEST(Golden, MatchesShapeOperatorOnTwentyPoints) {
  for (auto f : kFamilies)
    for (int n : {2, 3}) {
      const auto e = make_entry(f, n, 1.1, 1);
      const auto patch = instantiate(e);
      auto pts = grid_points(e.domain, n == 2 ? 5 : 3);
      pts.resize(20);
      for (const auto& p : pts) {
        VectorXd gold = golden_lambdas(e, p);
        std::sort(gold.data(), gold.data() + gold.size());
        EXPECT_LE((shape_operator(patch, p).lambdas - gold).cwiseAbs().maxCoeff(), 1e-5) << family_id(f);
      }
    }
}

TEST(Golden, NullGeodesicOrientationFromGolden) {
  const auto e = make_entry(Family::rotation_sig_minus_null, 3, pi / 4, 1, profiles::null_geodesic(1.2, 0.3));
  const auto patch = instantiate(e);
  for (const auto& p : grid_points(e.domain, 2)) {
    VectorXd gold = golden_lambdas(e, p);
    std::sort(gold.data(), gold.data() + gold.size());
    EXPECT_LE((shape_operator(patch, p).lambdas - gold).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(Golden, DegenerateProfile) {
  CatalogEntry e;
  e.family = Family::rotation_sig_plus_minus;
  e.n = 2;
  e.domain = Box::uniform(2, 0.3, 1.3);
  e.profile = {"curve", {}, [](double) { return ProfileJet{{0.0, 2.0, 0.0}, {0.0, 0.0, 0.0}, {0, 0, 0}}; }};
  EXPECT_THROW(golden_lambdas(e, Eigen::Vector2d(0.5, 0.5)), DegenerateProfileError);
}

TEST(MakeEntry, ParameterErrors) {
  EXPECT_THROW(make_entry(Family::umbilic, 2, 0.0), ConstraintError);
  EXPECT_THROW(make_entry(Family::product, 2, pi / 2, 1), ConstraintError);
  EXPECT_THROW(make_entry(Family::product, 2, 0.5, 2), ConfigError);
  EXPECT_THROW(make_entry(Family::product, 3, 0.5, 0), ConfigError);
  EXPECT_THROW(make_entry(Family::rotation_sig_minus_minus, 1), ConfigError);
  EXPECT_THROW(make_entry(Family::umbilic, 0), ConfigError);
  EXPECT_THROW(make_entry(Family::umbilic, 2, 0.5, 1, std::nullopt, Box::uniform(3, 0, 1)), ConfigError);
  EXPECT_THROW(make_profile(Family::rotation_sig_minus_minus, "sine", {}), ConfigError);
  EXPECT_EQ(make_profile(Family::rotation_sig_minus_minus, "sinh", {{"c", 2.0}}).params.at("c"), 2.0);
}

TEST(RandomProfile, SeededAndValid) {
  for (auto f : {Family::rotation_sig_plus_minus, Family::rotation_sig_minus_minus,
                 Family::rotation_sig_minus_null}) {
    std::mt19937_64 a(42), b(42);
    const Profile pa = random_profile(f, a), pb = random_profile(f, b);
    EXPECT_EQ(pa.params, pb.params);
    for (int t = 0; t < 5; ++t) EXPECT_NO_THROW(instantiate(make_entry(f, 3, 0.5, 1, random_profile(f, a))));
  }
  std::mt19937_64 rng(1);
  EXPECT_THROW(random_profile(Family::umbilic, rng), ContractViolation);
}

TEST(GridPoints, InteriorAndCount) {
  const Box box{Eigen::Vector2d(0.0, 1.0), Eigen::Vector2d(1.0, 3.0)};
  const auto pts = grid_points(box, 4);
  ASSERT_EQ(pts.size(), 16u);
  for (const auto& p : pts) EXPECT_TRUE(box.contains(p, 0.19));
  EXPECT_NEAR(pts.front()(0), 0.2, 1e-15);
  EXPECT_NEAR(pts.front()(1), 1.4, 1e-15);
  EXPECT_THROW(grid_points(box, 0), ConfigError);
}
