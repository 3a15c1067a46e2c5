#pragma once

// The complex hyperbolic quadric through unit lifts.
//
// A point [z] of the quadric is carried by a representative z of the
// circle bundle V*: h(z,z) = -1 and q(z) = 0. Tangent vectors at [z] are
// carried by their horizontal lifts w at z: h(w, z) = 0 (tangent to the
// pseudo-sphere and orthogonal to the fiber iz) and h(w, conj z) = 0 (tangent
// to the quadric). The metric is Re h, and J is multiplication by i.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>

#include "qgv/indefinite_linalg.hpp"

namespace qgv {

struct QuadricPoint {
  CVector z;

  /// Validates the lift invariants; throws InvariantError.
  static QuadricPoint from_lift(CVector z, double tol = 1e-8) {
    const cplx n = hermitian_form(z, z);
    if (std::abs(n.real() + 1.0) > tol || std::abs(n.imag()) > tol)
      throw InvariantError("lift is not unit: h(z,z) = (" + std::to_string(n.real()) + ", " +
                           std::to_string(n.imag()) + ")");
    if (std::abs(quadric_residual(z)) > tol)
      throw InvariantError("lift is off the quadric: |q(z)| = " +
                           std::to_string(std::abs(quadric_residual(z))));
    return QuadricPoint{std::move(z)};
  }
};

struct HorizontalVector {
  CVector base;  // the lift the vector is attached to
  CVector w;
};

/// A = cos(phi) A0 + sin(phi) J A0 at one point, where A0 w = -conj(w) is the
/// structure induced by the carried lift. phi = 0 is the canonical choice.
struct GaugeAt {
  double phi = 0.0;
};

/// A product structure along a parametrized family of lifts: the canonical
/// structure of each lift, optionally rotated by a phase field.
struct ProductStructure {
  std::function<double(const VectorXd&)> phase;  // empty: canonical from lift

  static ProductStructure canonical() { return {}; }
  static ProductStructure rotated(std::function<double(const VectorXd&)> phi) {
    return {std::move(phi)};
  }
  static ProductStructure rotated(double phi) {
    return {[phi](const VectorXd&) { return phi; }};
  }
  bool is_canonical() const { return !phase; }
  GaugeAt at(const VectorXd& p) const { return {phase ? phase(p) : 0.0}; }
  /// The structure cos(dphi) A + sin(dphi) J A.
  ProductStructure rotate(std::function<double(const VectorXd&)> dphi) const {
    auto base = phase;
    return {[base, dphi](const VectorXd& p) { return (base ? base(p) : 0.0) + dphi(p); }};
  }
};

struct SamePoint {
  bool same = false;
  double residual = 0.0;
};

/// Whether w lies on the Hopf fiber of z: min_t |w - e^{it} z| <= tol.
inline SamePoint same_point(const CVector& z, const CVector& w, double tol = 1e-6) {
  if (z.size() != w.size()) throw ContractViolation("same_point: length mismatch");
  const cplx pairing = z.dot(w);  // sum conj(z_k) w_k
  const cplx phase = std::abs(pairing) > 0 ? pairing / std::abs(pairing) : cplx(1.0, 0.0);
  const double r = (w - phase * z).norm();
  return {r <= tol, r};
}

inline SamePoint same_point(const QuadricPoint& z, const QuadricPoint& w, double tol = 1e-6) {
  return same_point(z.z, w.z, tol);
}

/// Removes the components along z, iz, conj z and i conj z.
inline HorizontalVector horizontal_project(const CVector& z, const CVector& w) {
  const CVector zb = z.conjugate();
  Eigen::Matrix2cd gram;
  gram << hermitian_form(z, z), hermitian_form(zb, z), hermitian_form(z, zb),
      hermitian_form(zb, zb);
  Eigen::Vector2cd rhs(hermitian_form(w, z), hermitian_form(w, zb));
  const Eigen::Vector2cd c = gram.partialPivLu().solve(rhs);
  return {z, w - c(0) * z - c(1) * zb};
}

inline HorizontalVector horizontal_project(const QuadricPoint& z, const CVector& w) {
  return horizontal_project(z.z, w);
}

/// Largest violation of the four horizontality conditions.
inline double horizontality_residual(const HorizontalVector& X) {
  const cplx a = hermitian_form(X.w, X.base);
  const cplx b = hermitian_form(X.w, X.base.conjugate());
  return std::max({std::abs(a.real()), std::abs(a.imag()), std::abs(b.real()), std::abs(b.imag())});
}

namespace detail {
inline void require_same_base(const HorizontalVector& X, const HorizontalVector& Y) {
  const double scale = std::max(1.0, X.base.norm());
  if (X.base.size() != Y.base.size() || (X.base - Y.base).norm() > 1e-12 * scale)
    throw ContractViolation("tangent vectors are attached to different lifts");
}
}  // namespace detail

inline double quadric_metric(const HorizontalVector& X, const HorizontalVector& Y) {
  detail::require_same_base(X, Y);
  return hermitian_real(X.w, Y.w);
}

inline HorizontalVector apply_J(const HorizontalVector& X) {
  return {X.base, cplx(0.0, 1.0) * X.w};
}

inline HorizontalVector apply_A(const GaugeAt& gauge, const HorizontalVector& X) {
  const HorizontalVector a0 = horizontal_project(X.base, CVector(-X.w.conjugate()));
  if (gauge.phi == 0.0) return a0;
  return {X.base, (std::cos(gauge.phi) + cplx(0.0, std::sin(gauge.phi))) * a0.w};
}

inline HorizontalVector operator+(const HorizontalVector& X, const HorizontalVector& Y) {
  detail::require_same_base(X, Y);
  return {X.base, X.w + Y.w};
}
inline HorizontalVector operator-(const HorizontalVector& X, const HorizontalVector& Y) {
  detail::require_same_base(X, Y);
  return {X.base, X.w - Y.w};
}
inline HorizontalVector operator*(double s, const HorizontalVector& X) { return {X.base, s * X.w}; }

/// R(X,Y)Z of the quadric for the structure A given by `gauge`.
inline HorizontalVector curvature_Qstar(const GaugeAt& gauge, const HorizontalVector& X,
                                        const HorizontalVector& Y, const HorizontalVector& Z) {
  detail::require_same_base(X, Y);
  detail::require_same_base(X, Z);
  const auto g = [](const HorizontalVector& U, const HorizontalVector& V) {
    return hermitian_real(U.w, V.w);
  };
  const auto JX = apply_J(X), JY = apply_J(Y), JZ = apply_J(Z);
  const auto AX = apply_A(gauge, X), AY = apply_A(gauge, Y);
  const auto JAX = apply_J(AX), JAY = apply_J(AY);
  CVector r = -g(Y, Z) * X.w + g(X, Z) * Y.w - g(X, JZ) * JY.w + g(Y, JZ) * JX.w -
              2.0 * g(X, JY) * JZ.w - g(AY, Z) * AX.w + g(AX, Z) * AY.w - g(JAY, Z) * JAX.w +
              g(JAX, Z) * JAY.w;
  return {X.base, std::move(r)};
}

}  // namespace qgv
