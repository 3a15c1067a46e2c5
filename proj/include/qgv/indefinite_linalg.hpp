#pragma once

// Linear algebra over R^d_i and C^{n+2}_2. Negative-signature slots are
// always the leading coordinates.

#include <Eigen/Dense>
#include <complex>
#include <string>

#include "qgv/errors.hpp"

namespace qgv {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Absolute tolerance used for algebraic identities unless overridden.
inline constexpr double kDefaultTol = 1e-9;

/// A point of R^d_i: coordinates plus the number of leading timelike slots.
struct IndefVector {
  VectorXd coords;
  int index = 0;

  IndefVector() = default;
  IndefVector(VectorXd c, int idx) : coords(std::move(c)), index(idx) {
    if (coords.size() < 1 || index < 0 || index > coords.size())
      throw ContractViolation("IndefVector: need dimension >= 1 and 0 <= index <= dimension");
  }
  Eigen::Index dim() const { return coords.size(); }
};

/// Coordinates of C^{n+2}; slots 0 and 1 carry the negative sign of the
/// signature-(2, n) Hermitian form.
using CVector = VectorXcd;

/// Diagonal of the metric of R^d_i.
inline VectorXd signature_diagonal(Eigen::Index dim, int index) {
  VectorXd eta = VectorXd::Ones(dim);
  eta.head(index).setConstant(-1.0);
  return eta;
}

/// -x_1 y_1 - ... - x_i y_i + x_{i+1} y_{i+1} + ...
inline double inner_real(const IndefVector& x, const IndefVector& y) {
  if (x.dim() != y.dim() || x.index != y.index)
    throw ContractViolation("inner_real: dimension or index mismatch");
  return x.coords.head(x.index).dot(y.coords.head(x.index)) * -1.0 +
         x.coords.tail(x.dim() - x.index).dot(y.coords.tail(x.dim() - x.index));
}

/// Unchecked variant for hot loops: metric of R^{d}_2 (the ambient space of
/// anti-de Sitter space).
inline double ads_inner(const VectorXd& x, const VectorXd& y) {
  return -x(0) * y(0) - x(1) * y(1) + x.tail(x.size() - 2).dot(y.tail(y.size() - 2));
}

/// h(z, w) = -z0 conj(w0) - z1 conj(w1) + sum_{j>=2} z_j conj(w_j).
/// Sesquilinear: linear in z, conjugate-linear in w. Re h is the real metric
/// of C^{n+2}_2 ~ R^{2n+4}_4.
inline cplx hermitian_form(const CVector& z, const CVector& w) {
  if (z.size() != w.size())
    throw ContractViolation("hermitian_form: length mismatch");
  if (z.size() < 2)
    throw ContractViolation("hermitian_form: need at least two coordinates");
  cplx acc = -z(0) * std::conj(w(0)) - z(1) * std::conj(w(1));
  for (Eigen::Index j = 2; j < z.size(); ++j) acc += z(j) * std::conj(w(j));
  return acc;
}

/// Real part of the Hermitian form: the metric of C^{n+2}_2 as a real space.
inline double hermitian_real(const CVector& z, const CVector& w) {
  return hermitian_form(z, w).real();
}

/// q(z) = -z0^2 - z1^2 + sum_{j>=2} z_j^2. Vanishes exactly on the cone over
/// the quadric.
inline cplx quadric_residual(const CVector& z) {
  if (z.size() < 3) throw ContractViolation("quadric_residual: need n >= 1");
  cplx acc = -z(0) * z(0) - z(1) * z(1);
  for (Eigen::Index j = 2; j < z.size(); ++j) acc += z(j) * z(j);
  return acc;
}

/// Realification C^{n+2}_2 -> R^{2n+4}_4, (z_k) -> (Re z_0, Im z_0, Re z_1, ...).
inline IndefVector realify(const CVector& z) {
  VectorXd out(2 * z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    out(2 * k) = z(k).real();
    out(2 * k + 1) = z(k).imag();
  }
  return IndefVector(std::move(out), 4);
}

/// Metric G on a tangent space together with a G-self-adjoint endomorphism S.
struct SymPair {
  MatrixXd G;
  MatrixXd S;
};

struct GEigen {
  VectorXd values;   // ascending
  MatrixXd vectors;  // columns, G-orthonormal
};

/// Eigen-decomposition of a G-self-adjoint S for positive definite G
/// (Cholesky of G followed by a symmetric solve).
inline GEigen g_selfadjoint_eigen(const SymPair& p, double tol = kDefaultTol) {
  const auto n = p.G.rows();
  if (p.G.cols() != n || p.S.rows() != n || p.S.cols() != n)
    throw ContractViolation("g_selfadjoint_eigen: shape mismatch");
  const double scale = std::max(1.0, p.G.cwiseAbs().maxCoeff());
  if ((p.G - p.G.transpose()).cwiseAbs().maxCoeff() > tol * scale)
    throw ContractViolation("g_selfadjoint_eigen: G is not symmetric");
  const MatrixXd GS = p.G * p.S;
  const double gs_scale = std::max(1.0, GS.cwiseAbs().maxCoeff());
  if ((GS - GS.transpose()).cwiseAbs().maxCoeff() > 1e3 * tol * gs_scale)
    throw ContractViolation("g_selfadjoint_eigen: S is not G-self-adjoint");

  Eigen::SelfAdjointEigenSolver<MatrixXd> metric_spec(p.G, Eigen::EigenvaluesOnly);
  if (metric_spec.eigenvalues().minCoeff() <= tol * scale)
    throw SignatureError("metric is not positive definite (min eigenvalue " +
                         std::to_string(metric_spec.eigenvalues().minCoeff()) + ")");

  const MatrixXd sym = 0.5 * (GS + GS.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> solver(sym, p.G);
  if (solver.info() != Eigen::Success)
    throw SignatureError("generalized eigen-solve failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace qgv
