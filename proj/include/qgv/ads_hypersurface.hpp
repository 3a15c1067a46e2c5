#pragma once

// Extrinsic geometry of spacelike hypersurfaces a: U -> H^{n+1}_1(-1) in
// R^{n+2}_2.
//
// Sign conventions. The shape operator is S = G^{-1} Pi with
// Pi_ij = <d_i d_j a, b>, equivalently db = -da o S. For the totally
// umbilical chart (cos al, sin al p) with normal (sin al, -cos al p) this gives
// S = cot(al) id. The unit normal b is the timelike unit vector orthogonal to
// a and da whose sign makes det[a, d_1 a, ..., d_n a, b] have the sign of the
// patch orientation, which keeps b continuous over a connected chart.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "qgv/diffcalc.hpp"
#include "qgv/indefinite_linalg.hpp"

namespace qgv {

struct HypersurfacePatch {
  RealMap chart;         // U -> R^{n+2}_2
  int n = 0;
  int orientation = 1;   // +1 or -1, see file comment
  StencilPlan plan{};

  const Box& domain() const { return chart.domain; }
};

struct ShapeData {
  VectorXd point;
  VectorXd a;
  MatrixXd da;        // (n+2) x n, columns d_i a
  MatrixXd G;         // induced metric
  VectorXd b;         // unit normal, <b,b> = -1
  MatrixXd Pi;        // <d_i d_j a, b>
  MatrixXd S;         // G^{-1} Pi
  VectorXd lambdas;   // ascending
  MatrixXd directions;  // G-orthonormal principal directions (columns)
};

inline MatrixXd ads_gram(const MatrixXd& cols) {
  MatrixXd eta_cols = cols;
  eta_cols.topRows(2) *= -1.0;
  return cols.transpose() * eta_cols;
}

inline void require_spacelike(const MatrixXd& G, const char* where) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (G + G.transpose()), Eigen::EigenvaluesOnly);
  const double tol = 1e-10 * std::max(1.0, G.cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() <= tol)
    throw SignatureError(std::string(where) + ": induced metric not positive definite");
}

/// G_ij = <d_i a, d_j a>_2.
inline MatrixXd induced_metric(const HypersurfacePatch& patch, const VectorXd& p) {
  const MatrixXd da = jacobian(patch.chart, p, patch.plan.normal);
  MatrixXd G = ads_gram(da);
  G = 0.5 * (G + G.transpose());
  require_spacelike(G, "induced_metric");
  return G;
}

namespace detail {

// Timelike unit vector orthogonal to a and the columns of da, oriented.
inline VectorXd normal_from_frame(const VectorXd& a, const MatrixXd& da, int orientation) {
  const Eigen::Index N = a.size();
  const Eigen::Index n = da.cols();
  MatrixXd M(N, n + 1);
  M.col(0) = a;
  M.rightCols(n) = da;
  MatrixXd etaM = M;
  etaM.topRows(2) *= -1.0;
  Eigen::HouseholderQR<MatrixXd> qr(etaM);
  MatrixXd Q = qr.householderQ() * MatrixXd::Identity(N, N);
  VectorXd q = Q.col(N - 1);
  const double nn = ads_inner(q, q);
  if (!(nn < -1e-12))
    throw NormalDegenerateError("orthogonal complement of span{a, da} is not timelike");
  VectorXd b = q / std::sqrt(-nn);
  MatrixXd full(N, N);
  full.leftCols(n + 1) = M;
  full.col(N - 1) = b;
  const double det = full.determinant();
  if ((det > 0 ? 1 : -1) != orientation) b = -b;
  return b;
}

}  // namespace detail

/// Unit normal b tangent to H^{n+1}_1(-1): <b,b> = -1, <b,a> = 0, <b,d_i a> = 0.
inline VectorXd unit_normal(const HypersurfacePatch& patch, const VectorXd& p) {
  const MatrixXd da = jacobian(patch.chart, p, patch.plan.normal);
  require_spacelike(ads_gram(da), "unit_normal");
  return detail::normal_from_frame(patch.chart(p), da, patch.orientation);
}

/// The normal as a field on the chart domain.
inline RealMap normal_field(const HypersurfacePatch& patch) {
  return {[patch](const VectorXd& p) { return unit_normal(patch, p); }, patch.domain()};
}

inline ShapeData shape_operator(const HypersurfacePatch& patch, const VectorXd& p) {
  ShapeData sd;
  sd.point = p;
  sd.a = patch.chart(p);
  sd.da = jacobian(patch.chart, p, patch.plan.normal);
  sd.G = ads_gram(sd.da);
  sd.G = 0.5 * (sd.G + sd.G.transpose());
  require_spacelike(sd.G, "shape_operator");
  sd.b = detail::normal_from_frame(sd.a, sd.da, patch.orientation);

  const auto H = hessian(patch.chart, p, patch.plan.shape);
  const Eigen::Index n = p.size();
  sd.Pi.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) sd.Pi(i, j) = ads_inner(H(i, j), sd.b);
  sd.S = sd.G.ldlt().solve(sd.Pi);
  const GEigen eig = g_selfadjoint_eigen({sd.G, sd.S}, 1e-7);
  sd.lambdas = eig.values;
  sd.directions = eig.vectors;
  return sd;
}

/// Sets the orientation so that the computed normal at the domain center
/// points the same way as `reference` (a timelike vector).
inline HypersurfacePatch orient_like(HypersurfacePatch patch, const VectorXd& reference_at_center) {
  patch.orientation = 1;
  const VectorXd b = unit_normal(patch, patch.domain().center());
  if (ads_inner(b, reference_at_center) > 0) patch.orientation = -1;
  return patch;
}

/// p -> cos t a(p) + sin t b(p), with normal -sin t a + cos t b.
inline HypersurfacePatch parallel_patch(const HypersurfacePatch& patch, double t,
                                        const std::optional<VectorXd>& anchor = std::nullopt) {
  const double c = std::cos(t), s = std::sin(t);
  HypersurfacePatch out = patch;
  out.chart.eval = [patch, c, s](const VectorXd& p) -> VectorXd {
    return c * patch.chart(p) + s * unit_normal(patch, p);
  };
  const VectorXd ctr = anchor ? *anchor : patch.domain().center();
  const VectorXd expected = -s * patch.chart(ctr) + c * unit_normal(patch, ctr);
  out.orientation = 1;
  const MatrixXd da = jacobian(out.chart, ctr, out.plan.normal);
  require_spacelike(ads_gram(da), "parallel_patch");
  const VectorXd b = detail::normal_from_frame(out.chart(ctr), da, 1);
  if (ads_inner(b, expected) > 0) out.orientation = -1;
  return out;
}

/// Residuals of the patch invariants at the given points: the worst
/// | <a,a> + 1 |. Throws SignatureError if the chart is not spacelike.
inline double check_patch(const HypersurfacePatch& patch, const std::vector<VectorXd>& points) {
  double worst = 0.0;
  for (const auto& p : points) {
    const VectorXd a = patch.chart(p);
    worst = std::max(worst, std::abs(ads_inner(a, a) + 1.0));
    induced_metric(patch, p);
  }
  return worst;
}

}  // namespace qgv
