#pragma once

// Closed-form spacelike hypersurfaces of anti-de Sitter space with known
// principal curvatures: the umbilic and product families and three kinds of
// rotation hypersurfaces, whose axis of rotation has signature (+,-), (-,-)
// or is degenerate.
//
// Rotation profiles are unit-speed curves (f, g, h). The shipped profiles are
// closed-form; arc_length_reparametrize handles arbitrary regular seeds.

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qgv/ads_hypersurface.hpp"
#include "qgv/diffcalc.hpp"
#include "qgv/indefinite_linalg.hpp"

namespace qgv {

enum class Family {
  umbilic,
  product,
  rotation_sig_plus_minus,
  rotation_sig_minus_minus,
  rotation_sig_minus_null
};

inline const std::vector<std::pair<Family, std::string>>& family_names() {
  static const std::vector<std::pair<Family, std::string>> names{
      {Family::umbilic, "umbilic"},
      {Family::product, "product"},
      {Family::rotation_sig_plus_minus, "rotation_sig_plus_minus"},
      {Family::rotation_sig_minus_minus, "rotation_sig_minus_minus"},
      {Family::rotation_sig_minus_null, "rotation_sig_minus_null"}};
  return names;
}

inline std::string family_id(Family f) {
  for (const auto& [fam, name] : family_names())
    if (fam == f) return name;
  return "?";
}

inline Family parse_family(const std::string& id) {
  for (const auto& [fam, name] : family_names())
    if (name == id) return fam;
  throw ConfigError("unknown example id '" + id + "'");
}

inline bool is_rotation(Family f) {
  return f == Family::rotation_sig_plus_minus || f == Family::rotation_sig_minus_minus ||
         f == Family::rotation_sig_minus_null;
}

// ---------------------------------------------------------------------------
// profiles

/// (f, g, h) and its first two derivatives at one parameter value.
struct ProfileJet {
  Eigen::Vector3d v, d1, d2;
};

struct Profile {
  std::string kind;  // "constant", "sine", "sinh", "geodesic", "curve"
  std::map<std::string, double> params;
  std::function<ProfileJet(double)> jet;

  ProfileJet operator()(double s) const { return jet(s); }
};

namespace profiles {

/// g = 1/2, f = (sqrt3/2) cosh(2s/sqrt3), h = (sqrt3/2) sinh(2s/sqrt3).
inline Profile constant_g() {
  Profile p{"constant", {}, nullptr};
  p.jet = [](double s) {
    const double k = 2.0 / std::sqrt(3.0), A = 0.5 * std::sqrt(3.0);
    const double C = std::cosh(k * s), S = std::sinh(k * s);
    return ProfileJet{{A * C, 0.5, A * S}, {A * k * S, 0.0, A * k * C}, {A * k * k * C, 0.0, A * k * k * S}};
  };
  return p;
}

namespace detail {
// (r cosh b, r sinh b) with r = cos(ms), b = (sqrt(1+m^2)/m) gd^{-1}(ms)
struct SineCurve {
  double m;
  ProfileJet operator()(double s) const {
    const double x = m * s;
    const double w = std::sqrt(1.0 + m * m);
    const double sec = 1.0 / std::cos(x);
    const double b = (w / m) * std::log(sec + std::tan(x));
    const double b1 = w * sec, b2 = w * m * sec * std::tan(x);
    const double r = std::cos(x), r1 = -m * std::sin(x), r2 = -m * m * std::cos(x);
    const double C = std::cosh(b), S = std::sinh(b);
    ProfileJet j;
    j.v = {r * C, std::sin(x), r * S};
    j.d1 = {r1 * C + r * b1 * S, m * std::cos(x), r1 * S + r * b1 * C};
    j.d2 = {r2 * C + 2 * r1 * b1 * S + r * b2 * S + r * b1 * b1 * C, -m * m * std::sin(x),
            r2 * S + 2 * r1 * b1 * C + r * b2 * C + r * b1 * b1 * S};
    return j;
  }
};
}  // namespace detail

/// Signature (+,-) axis: g = sin(ms), valid for 0 < ms < pi/2.
inline Profile sine(double m) {
  if (!(m > 0.0)) throw ConstraintError("sine profile needs m > 0");
  return {"sine", {{"m", m}}, detail::SineCurve{m}};
}

/// Signature (-,-) axis: h = sinh(cs), f = cosh(cs) cos b, g = cosh(cs) sin b,
/// b = (sqrt(c^2-1)/c) atan(sinh(cs)); needs c > 1 and s > 0.
inline Profile sinh_profile(double c) {
  if (!(c > 1.0)) throw ConstraintError("sinh profile needs c > 1");
  Profile p{"sinh", {{"c", c}}, nullptr};
  p.jet = [c](double s) {
    const double w = std::sqrt(c * c - 1.0);
    const double ch = std::cosh(c * s), sh = std::sinh(c * s);
    const double b = (w / c) * std::atan(sh);
    const double b1 = w / ch, b2 = -w * c * sh / (ch * ch);
    const double r = ch, r1 = c * sh, r2 = c * c * ch;
    const double cb = std::cos(b), sb = std::sin(b);
    ProfileJet j;
    j.v = {r * cb, r * sb, sh};
    j.d1 = {r1 * cb - r * b1 * sb, r1 * sb + r * b1 * cb, c * ch};
    j.d2 = {r2 * cb - 2 * r1 * b1 * sb - r * b2 * sb - r * b1 * b1 * cb,
            r2 * sb + 2 * r1 * b1 * cb + r * b2 * cb - r * b1 * b1 * sb, c * c * sh};
    return j;
  };
  return p;
}

/// Degenerate axis, coordinates in the null basis: the sine curve
/// (X0, X1, X2) mapped to f = X0, g = (X2 - X1)/2, h = (X2 + X1)/2.
inline Profile null_sine(double m) {
  if (!(m > 0.0)) throw ConstraintError("sine profile needs m > 0");
  Profile p{"sine", {{"m", m}}, nullptr};
  p.jet = [curve = detail::SineCurve{m}](double s) {
    const ProfileJet x = curve(s);
    auto map = [](const Eigen::Vector3d& X) {
      return Eigen::Vector3d(X(0), 0.5 * (X(2) - X(1)), 0.5 * (X(2) + X(1)));
    };
    return ProfileJet{map(x.v), map(x.d1), map(x.d2)};
  };
  return p;
}

/// Degenerate axis: h = A sinh s, f = -cosh s + C A sinh s,
/// g = (f^2 - 1)/(4h). A geodesic of the profile plane.
inline Profile null_geodesic(double A, double C) {
  if (!(A > 0.0)) throw ConstraintError("geodesic profile needs A > 0");
  Profile p{"geodesic", {{"A", A}, {"C", C}}, nullptr};
  p.jet = [A, C](double s) {
    const double ch = std::cosh(s), sh = std::sinh(s);
    const double gs = (1.0 + C * C * A * A) / (4.0 * A), gc = -2.0 * C * A / (4.0 * A);
    ProfileJet j;
    j.v = {-ch + C * A * sh, gs * sh + gc * ch, A * sh};
    j.d1 = {-sh + C * A * ch, gs * ch + gc * sh, A * ch};
    j.d2 = j.v;
    return j;
  };
  return p;
}

/// Profile from an arbitrary curve; derivatives by finite differences.
inline Profile from_curve(RealMap curve, DiffConfig cfg = {1e-2, 4, false}) {
  Profile p{"curve", {}, nullptr};
  p.jet = [curve = std::move(curve), cfg](double s) {
    VectorXd x(1);
    x(0) = s;
    ProfileJet j;
    j.v = curve(x);
    j.d1 = jacobian(curve, x, cfg).col(0);
    j.d2 = hessian(curve, x, cfg)(0, 0);
    return j;
  };
  return p;
}

}  // namespace profiles

/// Metric of the plane carrying the profile: diag(-1,-1,1) for the
/// non-degenerate axes, -df^2 + 4 dg dh for the degenerate one.
inline Eigen::Matrix3d profile_metric(Family f) {
  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
  if (f == Family::rotation_sig_minus_null) {
    M(0, 0) = -1.0;
    M(1, 2) = M(2, 1) = 2.0;
  } else {
    M.diagonal() << -1.0, -1.0, 1.0;
  }
  return M;
}

struct ProfileResiduals {
  double on_quadric = 0.0;  // |<x,x> + 1|
  double unit_speed = 0.0;  // |<x',x'> - 1|
  double null_identity = 0.0;  // |(hf' - fh')^2 - (h'^2 - h^2)|, degenerate axis only
};

inline ProfileResiduals profile_residuals(Family f, const Profile& prof, const std::vector<double>& s) {
  const Eigen::Matrix3d M = profile_metric(f);
  ProfileResiduals r;
  for (double si : s) {
    const ProfileJet j = prof(si);
    r.on_quadric = std::max(r.on_quadric, std::abs(j.v.dot(M * j.v) + 1.0));
    r.unit_speed = std::max(r.unit_speed, std::abs(j.d1.dot(M * j.d1) - 1.0));
    if (f == Family::rotation_sig_minus_null) {
      const double fv = j.v(0), hv = j.v(2), fp = j.d1(0), hp = j.d1(2);
      const double lhs = (hv * fp - fv * hp) * (hv * fp - fv * hp);
      r.null_identity = std::max(r.null_identity, std::abs(lhs - (hp * hp - hv * hv)));
    }
  }
  return r;
}

inline void check_profile(Family f, const Profile& prof, const std::vector<double>& s, double tol = 1e-7) {
  const ProfileResiduals r = profile_residuals(f, prof, s);
  if (r.on_quadric > tol || r.unit_speed > tol || r.null_identity > tol)
    throw ConstraintError("profile '" + prof.kind + "' violates its constraints: quadric " +
                          std::to_string(r.on_quadric) + ", speed " + std::to_string(r.unit_speed) +
                          ", identity " + std::to_string(r.null_identity));
}

// ---------------------------------------------------------------------------
// reparametrization

/// Reparametrizes `curve` (one parameter, three components) by arc length for
/// the quadratic form `metric`: s(sigma) = origin + int_origin^sigma |c'|.
/// The squared speed must stay positive. Stencils need room at the ends, so
/// the result is defined on [s(lo + 2 step), s(hi - 2 step)].
inline RealMap arc_length_reparametrize(const RealMap& curve, const Eigen::Matrix3d& metric,
                                        std::optional<double> origin = std::nullopt,
                                        DiffConfig cfg = {1e-3, 4, false}) {
  if (curve.domain.dim() != 1) throw ContractViolation("arc_length_reparametrize: curve needs one parameter");
  const double lo = curve.domain.lo(0), hi = curve.domain.hi(0);
  const double o = origin.value_or(lo);
  const double margin = 2.0 * cfg.step;
  auto speed = [curve, metric, cfg, lo, hi, margin](double sigma) {
    VectorXd x(1);
    x(0) = std::clamp(sigma, lo + margin, hi - margin);
    const Eigen::Vector3d d = jacobian(curve, x, cfg).col(0);
    const double q = d.dot(metric * d);
    if (!(q > 1e-12))
      throw RegularityError("curve speed vanishes or changes type at sigma = " + std::to_string(sigma));
    return std::sqrt(q);
  };
  // the speed carries finite-difference noise near 1e-12, so tighter
  // quadrature tolerances only force maximal subdivision
  auto integral = [speed](double a, double b) {
    if (a == b) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(speed, a, b, 8, 1e-12);
  };
  // cumulative arc length at samples, integrated piecewise from the origin
  constexpr int kSamples = 64;
  std::vector<double> sig(kSamples + 1), arc(kSamples + 1);
  for (int i = 0; i <= kSamples; ++i) sig[i] = lo + margin + (hi - lo - 2 * margin) * i / kSamples;
  const auto anchor = static_cast<std::size_t>(std::lower_bound(sig.begin(), sig.end(), o) - sig.begin());
  const std::size_t a0 = std::min<std::size_t>(anchor, kSamples);
  arc[a0] = o + integral(o, sig[a0]);
  for (std::size_t i = a0 + 1; i <= kSamples; ++i) arc[i] = arc[i - 1] + integral(sig[i - 1], sig[i]);
  for (std::size_t i = a0; i-- > 0;) arc[i] = arc[i + 1] - integral(sig[i], sig[i + 1]);

  auto eval = [curve, speed, integral, sig, arc](const VectorXd& s) -> VectorXd {
    const double target = s(0);
    auto it = std::lower_bound(arc.begin(), arc.end(), target);
    std::size_t idx = std::min<std::size_t>(it - arc.begin(), arc.size() - 1);
    if (idx > 0 && target - arc[idx - 1] < arc[idx] - target) --idx;
    const double base_sigma = sig[idx], base_arc = arc[idx];
    auto fn = [&](double sigma) {
      return std::make_pair(base_arc + integral(base_sigma, sigma) - target, speed(sigma));
    };
    std::uintmax_t iters = 60;
    const double sigma =
        boost::math::tools::newton_raphson_iterate(fn, base_sigma, sig.front(), sig.back(), 50, iters);
    VectorXd x(1);
    x(0) = sigma;
    return curve(x);
  };
  return {eval, Box{VectorXd::Constant(1, arc.front()), VectorXd::Constant(1, arc.back())}};
}

// ---------------------------------------------------------------------------
// charts of model spaces

/// Hyperspherical chart of S^k in R^{k+1}.
inline VectorXd sphere_chart(const VectorXd& th) {
  const auto k = th.size();
  VectorXd x(k + 1);
  double prod = 1.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    x(i) = prod * std::cos(th(i));
    prod *= std::sin(th(i));
  }
  x(k) = prod;
  return x;
}

/// Polar chart of H^m in R^{m+1}_1: (cosh r, sinh r w) with w on S^{m-1};
/// for m = 1 simply (cosh u, sinh u).
inline VectorXd hyperbolic_chart(const VectorXd& u) {
  const auto m = u.size();
  VectorXd x(m + 1);
  x(0) = std::cosh(u(0));
  if (m == 1) {
    x(1) = std::sinh(u(0));
  } else {
    x.tail(m) = std::sinh(u(0)) * sphere_chart(u.tail(m - 1));
  }
  return x;
}

// ---------------------------------------------------------------------------
// catalog entries

struct CatalogEntry {
  Family family = Family::umbilic;
  int n = 2;
  double alpha = std::numbers::pi / 4;
  int k = 1;
  Profile profile;  // rotation families only
  Box domain;

  std::string id() const { return family_id(family); }
};

inline Profile default_profile(Family f) {
  switch (f) {
    case Family::rotation_sig_plus_minus: return profiles::constant_g();
    case Family::rotation_sig_minus_minus: return profiles::sinh_profile(1.5);
    case Family::rotation_sig_minus_null: return profiles::null_sine(0.7);
    default: return {};
  }
}

/// Profile by kind name with parameters, for configuration files and the CLI.
inline Profile make_profile(Family f, const std::string& kind, const std::map<std::string, double>& prm) {
  auto get = [&](const char* key, double dflt) {
    auto it = prm.find(key);
    return it == prm.end() ? dflt : it->second;
  };
  if (kind.empty() || kind == "default") return default_profile(f);
  switch (f) {
    case Family::rotation_sig_plus_minus:
      if (kind == "constant") return profiles::constant_g();
      if (kind == "sine") return profiles::sine(get("m", 0.7));
      break;
    case Family::rotation_sig_minus_minus:
      if (kind == "sinh") return profiles::sinh_profile(get("c", 1.5));
      break;
    case Family::rotation_sig_minus_null:
      if (kind == "sine") return profiles::null_sine(get("m", 0.7));
      if (kind == "geodesic") return profiles::null_geodesic(get("A", 1.2), get("C", 0.3));
      break;
    default: break;
  }
  throw ConfigError("profile '" + kind + "' is not available for " + family_id(f));
}

/// Validates parameters and fills the default domain [0.3, 1.3]^n.
inline CatalogEntry make_entry(Family f, int n, double alpha = std::numbers::pi / 4, int k = 1,
                               std::optional<Profile> profile = std::nullopt,
                               std::optional<Box> domain = std::nullopt) {
  if (n < 1) throw ConfigError("n must be at least 1");
  CatalogEntry e;
  e.family = f;
  e.n = n;
  e.alpha = alpha;
  e.k = k;
  if (f == Family::umbilic && std::abs(std::sin(alpha)) < 1e-9)
    throw ConstraintError("umbilic family needs sin(alpha) != 0");
  if (f == Family::product) {
    if (std::abs(std::sin(alpha) * std::cos(alpha)) < 1e-9)
      throw ConstraintError("product family needs sin(alpha) cos(alpha) != 0");
    if (k < 1 || k > n - 1) throw ConfigError("product family needs 1 <= k <= n-1");
  }
  if (is_rotation(f)) {
    if (n < 2) throw ConfigError("rotation families need n >= 2");
    e.profile = profile ? *profile : default_profile(f);
  }
  e.domain = domain ? *domain : Box::uniform(n, 0.3, 1.3);
  if (e.domain.dim() != n) throw ConfigError("domain box has the wrong dimension");
  if (is_rotation(f)) {
    std::vector<double> s;
    for (int i = 0; i <= 8; ++i) s.push_back(e.domain.lo(0) + (e.domain.hi(0) - e.domain.lo(0)) * i / 8.0);
    check_profile(f, e.profile, s);
  }
  return e;
}

namespace detail {

inline VectorXd interleave(const VectorXd& p, const VectorXd& q) {
  // (p1, q1, p2, ..., p_{k+1}, q2, ..., q_{n-k+1})
  VectorXd out(p.size() + q.size());
  out(0) = p(0);
  out(1) = q(0);
  out.segment(2, p.size() - 1) = p.tail(p.size() - 1);
  out.tail(q.size() - 1) = q.tail(q.size() - 1);
  return out;
}

inline VectorXd catalog_point(const CatalogEntry& e, const VectorXd& u) {
  const int n = e.n;
  switch (e.family) {
    case Family::umbilic: {
      VectorXd a(n + 2);
      a(0) = std::cos(e.alpha);
      a.tail(n + 1) = std::sin(e.alpha) * hyperbolic_chart(u);
      return a;
    }
    case Family::product:
      return interleave(std::cos(e.alpha) * hyperbolic_chart(u.head(e.k)),
                        std::sin(e.alpha) * hyperbolic_chart(u.tail(n - e.k)));
    case Family::rotation_sig_plus_minus: {
      const ProfileJet j = e.profile(u(0));
      VectorXd a(n + 2);
      a(0) = j.v(0);
      a.segment(1, n) = j.v(1) * hyperbolic_chart(u.tail(n - 1));
      a(n + 1) = j.v(2);
      return a;
    }
    case Family::rotation_sig_minus_minus: {
      const ProfileJet j = e.profile(u(0));
      VectorXd a(n + 2);
      a(0) = j.v(0);
      a(1) = j.v(1);
      a.tail(n) = j.v(2) * sphere_chart(u.tail(n - 1));
      return a;
    }
    case Family::rotation_sig_minus_null: {
      const ProfileJet j = e.profile(u(0));
      const double f = j.v(0), h = j.v(2);
      const VectorXd t = u.tail(n - 1);
      const double c2 = (f * f - 1.0 - h * h * t.squaredNorm()) / (4.0 * h);
      // u1 = E0, u2 = E2 + E1, u3 = E2 - E1, u_{j} = E_{j-1}
      VectorXd a(n + 2);
      a(0) = f;
      a(1) = c2 - h;
      a(2) = c2 + h;
      a.tail(n - 1) = h * t;
      return a;
    }
  }
  return {};
}

}  // namespace detail

/// Closed-form principal curvatures, listed as (lambda_1, lambda_2, ...) with
/// lambda_1 the profile direction for rotation families.
inline VectorXd golden_lambdas(const CatalogEntry& e, const VectorXd& u) {
  const int n = e.n;
  VectorXd lam(n);
  auto radical = [](double q, const char* what) {
    if (!(q > 1e-12)) throw DegenerateProfileError(std::string(what) + " radicand is not positive");
    return std::sqrt(q);
  };
  auto nonzero = [](double x, const char* what) {
    if (std::abs(x) < 1e-6) throw DegenerateProfileError(std::string(what) + " vanishes");
    return x;
  };
  switch (e.family) {
    case Family::umbilic:
      lam.setConstant(1.0 / std::tan(e.alpha));
      return lam;
    case Family::product:
      lam.head(e.k).setConstant(-std::tan(e.alpha));
      lam.tail(n - e.k).setConstant(1.0 / std::tan(e.alpha));
      return lam;
    case Family::rotation_sig_plus_minus: {
      const ProfileJet j = e.profile(u(0));
      const double g = j.v(1), g1 = j.d1(1), g2 = j.d2(1);
      const double w = radical(1.0 + g1 * g1 - g * g, "1 + g'^2 - g^2");
      lam(0) = (g - g2) / w;
      lam.tail(n - 1).setConstant(-w / nonzero(g, "g"));
      return lam;
    }
    case Family::rotation_sig_minus_minus: {
      const ProfileJet j = e.profile(u(0));
      const double h = j.v(2), h1 = j.d1(2), h2 = j.d2(2);
      const double w = radical(h1 * h1 - h * h - 1.0, "h'^2 - h^2 - 1");
      lam(0) = (h2 - h) / w;
      lam.tail(n - 1).setConstant(w / nonzero(h, "h"));
      return lam;
    }
    case Family::rotation_sig_minus_null: {
      const ProfileJet j = e.profile(u(0));
      const double h = j.v(2), h1 = j.d1(2), h2 = j.d2(2);
      const double w = radical(h1 * h1 - h * h, "h'^2 - h^2");
      lam(0) = (h2 - h) / w;
      lam.tail(n - 1).setConstant(w / nonzero(h, "h"));
      return lam;
    }
  }
  return lam;
}

/// cot of the angle functions for the canonical lift; equal to the principal
/// curvatures.
inline VectorXd golden_cot_theta(const CatalogEntry& e, const VectorXd& u) { return golden_lambdas(e, u); }

/// Explicit unit normal where a closed form is available.
inline std::optional<VectorXd> closed_form_normal(const CatalogEntry& e, const VectorXd& u) {
  const int n = e.n;
  switch (e.family) {
    case Family::umbilic: {
      VectorXd b(n + 2);
      b(0) = std::sin(e.alpha);
      b.tail(n + 1) = -std::cos(e.alpha) * hyperbolic_chart(u);
      return b;
    }
    case Family::product:
      return detail::interleave(std::sin(e.alpha) * hyperbolic_chart(u.head(e.k)),
                                -std::cos(e.alpha) * hyperbolic_chart(u.tail(n - e.k)));
    case Family::rotation_sig_plus_minus: {
      const ProfileJet j = e.profile(u(0));
      const double f = j.v(0), g = j.v(1), h = j.v(2), f1 = j.d1(0), g1 = j.d1(1), h1 = j.d1(2);
      VectorXd b(n + 2);
      b(0) = h * g1 - g * h1;
      b.segment(1, n) = (f * h1 - h * f1) * hyperbolic_chart(u.tail(n - 1));
      b(n + 1) = f * g1 - g * f1;
      return b;
    }
    case Family::rotation_sig_minus_minus: {
      // Lorentzian cross product of the profile and its tangent, negated
      const ProfileJet j = e.profile(u(0));
      const double f = j.v(0), g = j.v(1), h = j.v(2), f1 = j.d1(0), g1 = j.d1(1), h1 = j.d1(2);
      VectorXd b(n + 2);
      b(0) = -(h * g1 - g * h1);
      b(1) = -(f * h1 - h * f1);
      b.tail(n) = -(f * g1 - g * f1) * sphere_chart(u.tail(n - 1));
      return b;
    }
    case Family::rotation_sig_minus_null:
      return std::nullopt;
  }
  return std::nullopt;
}

/// Gauss lift (i, p)/sqrt2 or psi(ip, q)/sqrt2 for the two homogeneous families.
inline std::optional<CVector> closed_form_gauss_lift(const CatalogEntry& e, const VectorXd& u) {
  const cplx I(0.0, 1.0);
  const double r = 1.0 / std::sqrt(2.0);
  if (e.family == Family::umbilic) {
    CVector z(e.n + 2);
    z(0) = I;
    z.tail(e.n + 1) = hyperbolic_chart(u).cast<cplx>();
    return CVector(r * z);
  }
  if (e.family == Family::product) {
    const VectorXd p = hyperbolic_chart(u.head(e.k));
    const VectorXd q = hyperbolic_chart(u.tail(e.n - e.k));
    const VectorXd re = detail::interleave(VectorXd::Zero(p.size()), q);
    const VectorXd im = detail::interleave(p, VectorXd::Zero(q.size()));
    CVector z(e.n + 2);
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = cplx(re(i), im(i));
    return CVector(r * z);
  }
  return std::nullopt;
}

/// The hypersurface of an entry, oriented so that its principal curvatures
/// are the golden ones.
inline HypersurfacePatch instantiate(const CatalogEntry& e, StencilPlan plan = {}) {
  if (is_rotation(e.family)) {
    std::vector<double> s;
    for (int i = 0; i <= 8; ++i) s.push_back(e.domain.lo(0) + (e.domain.hi(0) - e.domain.lo(0)) * i / 8.0);
    check_profile(e.family, e.profile, s);
  }
  HypersurfacePatch patch;
  patch.n = e.n;
  patch.plan = plan;
  patch.chart = {[e](const VectorXd& u) { return detail::catalog_point(e, u); }, e.domain};
  const VectorXd ctr = e.domain.center();
  if (auto b = closed_form_normal(e, ctr)) return orient_like(patch, *b);
  // no closed-form normal: pick the orientation whose spectrum matches
  patch.orientation = 1;
  VectorXd gold = golden_lambdas(e, ctr);
  std::sort(gold.data(), gold.data() + gold.size());
  const double plus = (shape_operator(patch, ctr).lambdas - gold).cwiseAbs().maxCoeff();
  patch.orientation = -1;
  const double minus = (shape_operator(patch, ctr).lambdas - gold).cwiseAbs().maxCoeff();
  patch.orientation = plus <= minus ? 1 : -1;
  return patch;
}

/// Randomized profile for a rotation family, drawn from ranges that keep the
/// default domain regular.
inline Profile random_profile(Family f, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (f) {
    case Family::rotation_sig_plus_minus: return profiles::sine(0.4 + 0.6 * unit(rng));
    case Family::rotation_sig_minus_minus: return profiles::sinh_profile(1.2 + 1.0 * unit(rng));
    case Family::rotation_sig_minus_null: return profiles::null_sine(0.4 + 0.6 * unit(rng));
    default: throw ContractViolation("random_profile: not a rotation family");
  }
}

/// Interior grid points a + (b - a)(i + 1)/(N + 1) per axis.
inline std::vector<VectorXd> grid_points(const Box& box, int per_axis) {
  if (per_axis < 1) throw ConfigError("grid needs at least one point per axis");
  const auto d = box.dim();
  std::vector<VectorXd> pts;
  std::vector<int> idx(d, 0);
  while (true) {
    VectorXd p(d);
    for (Eigen::Index i = 0; i < d; ++i)
      p(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * (idx[i] + 1.0) / (per_axis + 1.0);
    pts.push_back(p);
    Eigen::Index ax = 0;
    while (ax < d && ++idx[ax] == per_axis) idx[ax++] = 0;
    if (ax == d) break;
  }
  return pts;
}

}  // namespace qgv
