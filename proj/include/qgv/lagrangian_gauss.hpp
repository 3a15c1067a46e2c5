#pragma once

// Gauss maps of spacelike hypersurfaces of anti-de Sitter space and the
// identities relating them to the hypersurface.
//
// Everything is computed through the lift G~ = (a + i b)/sqrt(2) in flat
// C^{n+2} coordinates: tangent vectors of the Gauss map are the columns of
// dG~, ambient covariant derivatives are flat second derivatives of G~
// followed by projection. Conventions used throughout:
//
//   h_ij^k = g(h(e_i, e_j), J e_k)            (totally symmetric)
//   H      = (1/n) sum_i h(e_i, e_i),  so g(JH, e_k) = -(1/n) sum_i h_ii^k
//   A e_j  = cos(2 th_j) e_j - sin(2 th_j) J e_j,  th_j in [0, pi)
//   B, C   from A X = B X - J C X

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qgv/ads_hypersurface.hpp"
#include "qgv/diffcalc.hpp"
#include "qgv/quadric_geometry.hpp"

namespace qgv {

// ---------------------------------------------------------------------------
// angles modulo pi

inline double wrap_pi(double x) {
  double r = std::fmod(x, std::numbers::pi);
  if (r < 0) r += std::numbers::pi;
  if (r >= std::numbers::pi) r -= std::numbers::pi;
  return r;
}

/// Distance between two angles regarded modulo pi, in [0, pi/2].
inline double dist_mod_pi(double a, double b) {
  const double d = wrap_pi(a - b);
  return std::min(d, std::numbers::pi - d);
}

/// Representative of x - ref in (-pi/2, pi/2], added back to ref.
inline double unwrap_near(double x, double ref) {
  double d = wrap_pi(x - ref);
  if (d > 0.5 * std::numbers::pi) d -= std::numbers::pi;
  return ref + d;
}

/// Distance between two multisets of angles modulo pi: sort both and take
/// the best cyclic alignment of the sorted lists.
inline double angle_multiset_distance(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size()) throw ContractViolation("angle_multiset_distance: size mismatch");
  for (auto& x : a) x = wrap_pi(x);
  for (auto& x : b) x = wrap_pi(x);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t n = a.size();
  double best = std::numbers::pi;
  for (std::size_t shift = 0; shift < std::max<std::size_t>(n, 1); ++shift) {
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, dist_mod_pi(a[j], b[(j + shift) % n]));
    best = std::min(best, worst);
  }
  return n == 0 ? 0.0 : best;
}

// ---------------------------------------------------------------------------
// Gauss map

struct GaussMapField {
  HypersurfacePatch patch;
  ComplexMap lift;  // p -> e^{i phase} (a(p) + i b(p)) / sqrt(2)
  double phase = 0.0;

  int n() const { return patch.n; }
  const StencilPlan& plan() const { return patch.plan; }
};

inline CVector gauss_lift_value(const HypersurfacePatch& patch, const VectorXd& p, double phase) {
  const VectorXd a = patch.chart(p);
  const VectorXd b = unit_normal(patch, p);
  const cplx factor = std::polar(1.0 / std::sqrt(2.0), phase);
  CVector z(a.size());
  for (Eigen::Index k = 0; k < a.size(); ++k) z(k) = factor * cplx(a(k), b(k));
  return z;
}

/// Gauss map with the canonical lift (a + i b)/sqrt(2). A nonzero `phase`
/// multiplies the lift by the constant e^{i phase}, which keeps it
/// horizontal and rotates the canonical product structure by -2 phase.
inline GaussMapField build_gauss_map(const HypersurfacePatch& patch, double phase = 0.0) {
  GaussMapField gm;
  gm.patch = patch;
  gm.phase = phase;
  gm.lift = {[patch, phase](const VectorXd& p) { return gauss_lift_value(patch, p, phase); },
             patch.domain()};
  QuadricPoint::from_lift(gm.lift(patch.domain().center()));
  return gm;
}

/// Lift, its horizontal derivative frame and the forms of the structure A
/// at one parameter point, all in coordinate components.
struct LiftFrame {
  VectorXd point;
  CVector z;
  MatrixXcd dlift;  // raw columns d_i G~
  MatrixXcd X;      // horizontal projections of the columns
  MatrixXd g;       // g(X_i, X_j)
};

inline LiftFrame lift_frame(const GaussMapField& gm, const VectorXd& p) {
  LiftFrame lf;
  lf.point = p;
  lf.z = QuadricPoint::from_lift(gm.lift(p)).z;
  lf.dlift = jacobian(gm.lift, p, gm.plan().lift);
  const auto n = lf.dlift.cols();
  lf.X.resize(lf.z.size(), n);
  for (Eigen::Index i = 0; i < n; ++i) lf.X.col(i) = horizontal_project(lf.z, lf.dlift.col(i)).w;
  lf.g.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) lf.g(i, j) = hermitian_real(lf.X.col(i), lf.X.col(j));
  lf.g = 0.5 * (lf.g + lf.g.transpose());
  require_spacelike(lf.g, "lift_frame");
  return lf;
}

/// Coefficients of a g-orthonormal frame (columns) in the coordinate basis.
inline MatrixXd orthonormal_coefficients(const MatrixXd& g) {
  Eigen::LLT<MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw SignatureError("metric is not positive definite");
  const MatrixXd L = llt.matrixL();
  return L.transpose().triangularView<Eigen::Upper>().solve(MatrixXd::Identity(g.rows(), g.cols()));
}

/// Worst |Re h(e_i G~, i G~)| over a g-orthonormal frame, before projection.
inline double lift_horizontality(const GaussMapField& gm, const VectorXd& p) {
  const LiftFrame lf = lift_frame(gm, p);
  const MatrixXcd E = lf.dlift * orthonormal_coefficients(lf.g).cast<cplx>();
  const CVector iz = cplx(0.0, 1.0) * lf.z;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < E.cols(); ++i)
    worst = std::max(worst, std::abs(hermitian_real(E.col(i), iz)));
  return worst;
}

/// Worst |g(J e_i, e_j)| over a g-orthonormal frame of the Gauss map.
inline double lagrangian_residual(const GaussMapField& gm, const VectorXd& p) {
  const LiftFrame lf = lift_frame(gm, p);
  const MatrixXcd E = lf.X * orthonormal_coefficients(lf.g).cast<cplx>();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < E.cols(); ++i)
    for (Eigen::Index j = 0; j < E.cols(); ++j)
      worst = std::max(worst, std::abs(hermitian_real(cplx(0.0, 1.0) * E.col(i), E.col(j))));
  return worst;
}

/// Coordinate components b_ij = g(A X_i, X_j) and c_ij = g(C X_i, X_j)
/// = -g(A X_i, J X_j).
struct StructureForms {
  MatrixXd b;
  MatrixXd c;
};

inline StructureForms structure_forms(const LiftFrame& lf, const GaugeAt& gauge) {
  const auto n = lf.X.cols();
  StructureForms f{MatrixXd(n, n), MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const HorizontalVector AX = apply_A(gauge, {lf.z, lf.X.col(i)});
    for (Eigen::Index j = 0; j < n; ++j) {
      f.b(i, j) = hermitian_real(AX.w, lf.X.col(j));
      f.c(i, j) = -hermitian_real(AX.w, cplx(0.0, 1.0) * lf.X.col(j));
    }
  }
  return f;
}

struct AngleSpectrum {
  VectorXd point;
  MatrixXd frame;  // columns: coordinate vectors of e_1..e_n, g-orthonormal
  VectorXd theta;  // ascending in [0, pi)
  MatrixXd B;      // in the frame e
  MatrixXd C;
  GaugeAt gauge;
  std::vector<int> cluster;  // indices with equal angle share an id
  double commutator = 0.0;   // |BC - CB| before diagonalization
  double pythagoras = 0.0;   // |B^2 + C^2 - I| before diagonalization
  double asymmetry = 0.0;    // |B - B^T| + |C - C^T| before symmetrizing
};

inline constexpr double kClusterTol = 1e-6;

inline std::vector<int> cluster_angles(const VectorXd& theta, double tol = kClusterTol) {
  const auto n = theta.size();
  std::vector<int> id(n, -1);
  int next = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (id[j] >= 0) continue;
    id[j] = next;
    for (Eigen::Index k = j + 1; k < n; ++k)
      if (id[k] < 0 && dist_mod_pi(theta(j), theta(k)) < tol) id[k] = next;
    ++next;
  }
  return id;
}

namespace detail {

inline AngleSpectrum spectrum_from(const LiftFrame& lf, const GaugeAt& gauge) {
  const auto n = lf.X.cols();
  const MatrixXd F = orthonormal_coefficients(lf.g);
  const StructureForms sf = structure_forms(lf, gauge);
  // B^_ab = g(A f_b, f_a): transpose of the coordinate form, then change of basis
  MatrixXd Bh = F.transpose() * sf.b.transpose() * F;
  MatrixXd Ch = F.transpose() * sf.c.transpose() * F;

  AngleSpectrum out;
  out.point = lf.point;
  out.gauge = gauge;
  out.asymmetry = (Bh - Bh.transpose()).cwiseAbs().maxCoeff() + (Ch - Ch.transpose()).cwiseAbs().maxCoeff();
  Bh = 0.5 * (Bh + Bh.transpose());
  Ch = 0.5 * (Ch + Ch.transpose());
  out.commutator = (Bh * Ch - Ch * Bh).cwiseAbs().maxCoeff();
  out.pythagoras = (Bh * Bh + Ch * Ch - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (out.commutator > 1e-5)
    throw JointDiagonalizationError("B and C do not commute: |[B,C]| = " + std::to_string(out.commutator));

  Eigen::SelfAdjointEigenSolver<MatrixXd> eb(Bh);
  MatrixXd V = eb.eigenvectors();
  const VectorXd beta = eb.eigenvalues();
  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index stop = start + 1;
    while (stop < n && beta(stop) - beta(stop - 1) < kClusterTol) ++stop;
    const Eigen::Index len = stop - start;
    if (len > 1) {
      const MatrixXd Vc = V.middleCols(start, len);
      Eigen::SelfAdjointEigenSolver<MatrixXd> ec(Vc.transpose() * Ch * Vc);
      V.middleCols(start, len) = Vc * ec.eigenvectors();
    }
    start = stop;
  }

  VectorXd theta(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double bj = V.col(j).dot(Bh * V.col(j));
    const double cj = V.col(j).dot(Ch * V.col(j));
    theta(j) = wrap_pi(0.5 * std::atan2(cj, bj));
  }
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return theta(x) < theta(y); });
  MatrixXd Vs(n, n);
  out.theta.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vs.col(j) = V.col(order[j]);
    out.theta(j) = theta(order[j]);
  }
  out.frame = F * Vs;
  out.B = Vs.transpose() * Bh * Vs;
  out.C = Vs.transpose() * Ch * Vs;
  out.cluster = cluster_angles(out.theta);
  return out;
}

}  // namespace detail

inline AngleSpectrum angle_spectrum(const GaussMapField& gm, const GaugeAt& gauge, const VectorXd& p) {
  return detail::spectrum_from(lift_frame(gm, p), gauge);
}

inline AngleSpectrum angle_spectrum(const GaussMapField& gm, const ProductStructure& P,
                                    const VectorXd& p) {
  return angle_spectrum(gm, P.at(p), p);
}

/// Rotates the gauge by phi = 2 (th_1 + ... + th_n)/n, after which the
/// angles sum to 0 mod pi. The mean is taken over the angles unwrapped near
/// th_1, so spectra straddling 0 mod pi are not shifted by pi/n. The frame is
/// unchanged.
inline AngleSpectrum gauge_normalize(const AngleSpectrum& spec) {
  const auto n = spec.theta.size();
  double shift = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) shift += unwrap_near(spec.theta(j), spec.theta(0));
  shift /= static_cast<double>(n);
  AngleSpectrum out = spec;
  out.gauge.phi = spec.gauge.phi + 2.0 * shift;
  for (Eigen::Index j = 0; j < n; ++j) out.theta(j) = wrap_pi(spec.theta(j) - shift);
  // B + iC = diag(e^{2i th}); rotating A by phi multiplies it by e^{-i phi}
  const double c2 = std::cos(2.0 * shift), s2 = std::sin(2.0 * shift);
  out.B = c2 * spec.B + s2 * spec.C;
  out.C = c2 * spec.C - s2 * spec.B;
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return out.theta(x) < out.theta(y); });
  AngleSpectrum sorted = out;
  for (Eigen::Index j = 0; j < n; ++j) {
    sorted.theta(j) = out.theta(order[j]);
    sorted.frame.col(j) = out.frame.col(order[j]);
    for (Eigen::Index k = 0; k < n; ++k) {
      sorted.B(j, k) = out.B(order[j], order[k]);
      sorted.C(j, k) = out.C(order[j], order[k]);
    }
  }
  sorted.cluster = cluster_angles(sorted.theta);
  return sorted;
}

/// Largest deviation of sum(theta) from a multiple of pi.
inline double angle_sum_residual(const VectorXd& theta) {
  return dist_mod_pi(theta.sum(), 0.0);
}

/// Worst |A e_j - cos(2 th_j) e_j + sin(2 th_j) J e_j| over the frame.
inline double adapted_frame_residual(const GaussMapField& gm, const AngleSpectrum& spec) {
  const LiftFrame lf = lift_frame(gm, spec.point);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < spec.theta.size(); ++j) {
    const CVector e = lf.X * spec.frame.col(j).cast<cplx>();
    const CVector Ae = apply_A(spec.gauge, {lf.z, e}).w;
    const CVector r = Ae - std::cos(2 * spec.theta(j)) * e + std::sin(2 * spec.theta(j)) * (cplx(0, 1) * e);
    worst = std::max(worst, std::sqrt(std::max(0.0, hermitian_real(r, r))));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// principal curvatures vs angles

struct PairResidual {
  int j = 0;
  int k = 0;
  double residual = 0.0;
  bool infinite = false;  // th_j == th_k mod pi while lambda_j != lambda_k
};

struct ThetaLambdaReport {
  VectorXd lambdas;         // ascending
  VectorXd cot_theta;       // ascending
  VectorXd direct;          // |lambda_j - cot th_j| after sorting both
  std::vector<PairResidual> pairs;
  VectorXd lambda_in_frame;  // Rayleigh quotient of S on each e_j
};

/// lambda_j = cot th_j for the canonical gauge, plus the gauge-free
/// cot(th_j - th_k) = +-(lambda_j lambda_k + 1)/(lambda_j - lambda_k).
inline ThetaLambdaReport verify_theta_lambda(const GaussMapField& gm, const VectorXd& p,
                                             const GaugeAt& gauge = {}, double min_gap = 1e-6) {
  const ShapeData sd = shape_operator(gm.patch, p);
  const AngleSpectrum spec = angle_spectrum(gm, gauge, p);
  const auto n = spec.theta.size();
  ThetaLambdaReport r;
  r.lambdas = sd.lambdas;
  std::vector<double> cots(n);
  for (Eigen::Index j = 0; j < n; ++j) cots[j] = 1.0 / std::tan(spec.theta(j));
  std::sort(cots.begin(), cots.end());
  r.cot_theta = Eigen::Map<VectorXd>(cots.data(), n);
  r.direct = (r.lambdas - r.cot_theta).cwiseAbs();

  r.lambda_in_frame.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const VectorXd& e = spec.frame.col(j);
    r.lambda_in_frame(j) = e.dot(sd.Pi * e) / e.dot(sd.G * e);
  }
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      const double lj = r.lambda_in_frame(j), lk = r.lambda_in_frame(k);
      if (std::abs(lj - lk) < min_gap) continue;
      PairResidual pr{j, k, 0.0, false};
      const double rhs = (lj * lk + 1.0) / (lj - lk);
      const double d = spec.theta(j) - spec.theta(k);
      if (dist_mod_pi(d, 0.0) < 1e-9) {
        pr.infinite = true;
        pr.residual = 1.0 / (1.0 + std::abs(rhs));
      } else {
        const double cot_d = std::cos(d) / std::sin(d);
        const double scale = std::max(1.0, std::abs(rhs));
        pr.residual = std::min(std::abs(cot_d - rhs), std::abs(cot_d + rhs)) / scale;
      }
      r.pairs.push_back(pr);
    }
  return r;
}

// ---------------------------------------------------------------------------
// second fundamental form

struct LagrangianSFF {
  int n = 0;
  std::vector<double> h;  // h_ij^k in the spectrum frame, index (i*n + j)*n + k
  VectorXd JH;            // g(JH, e_k)
  std::vector<double> sigma;  // same tensor in coordinate components

  double operator()(int i, int j, int k) const { return h[(i * n + j) * n + k]; }
  double max_abs() const {
    double m = 0.0;
    for (double v : h) m = std::max(m, std::abs(v));
    return m;
  }
  /// Worst deviation from total symmetry.
  double symmetry_residual() const {
    double m = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const double v = (*this)(i, j, k);
          for (double w : {(*this)(j, i, k), (*this)(i, k, j), (*this)(k, j, i), (*this)(j, k, i),
                           (*this)(k, i, j)})
            m = std::max(m, std::abs(v - w));
        }
    return m;
  }
};

/// sigma_ijk = g(h(d_i, d_j), J d_k) = Re h(d_i d_j G~, i X_k) in coordinates.
inline std::vector<double> sff_coordinates(const GaussMapField& gm, const VectorXd& p) {
  const LiftFrame lf = lift_frame(gm, p);
  const auto H = hessian(gm.lift, p, gm.plan().lift2);
  const int n = static_cast<int>(p.size());
  std::vector<double> s(n * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        s[(i * n + j) * n + k] = hermitian_real(H(i, j), cplx(0.0, 1.0) * lf.X.col(k));
  return s;
}

inline std::vector<double> to_frame3(const std::vector<double>& s, const MatrixXd& E) {
  const int n = static_cast<int>(E.rows());
  std::vector<double> out(n * n * n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) acc += E(i, a) * E(j, b) * E(k, c) * s[(i * n + j) * n + k];
        out[(a * n + b) * n + c] = acc;
      }
  return out;
}

inline LagrangianSFF second_fundamental_form(const GaussMapField& gm, const AngleSpectrum& spec,
                                             const VectorXd& p) {
  LagrangianSFF sff;
  sff.n = static_cast<int>(p.size());
  sff.sigma = sff_coordinates(gm, p);
  sff.h = to_frame3(sff.sigma, spec.frame);
  sff.JH = VectorXd::Zero(sff.n);
  for (int k = 0; k < sff.n; ++k) {
    for (int i = 0; i < sff.n; ++i) sff.JH(k) -= sff(i, i, k);
    sff.JH(k) /= sff.n;
  }
  return sff;
}

// ---------------------------------------------------------------------------
// mean curvature

struct PalmerReport {
  VectorXd lhs;  // g(JH, dG d_i)
  VectorXd rhs;  // (1/n) d_i sum arctan lambda_j
  double residual() const { return (lhs - rhs).cwiseAbs().maxCoeff(); }
};

inline RealMap arctan_sum_field(const HypersurfacePatch& patch) {
  return scalar_field(
      [patch](const VectorXd& q) {
        const ShapeData sd = shape_operator(patch, q);
        double acc = 0.0;
        for (Eigen::Index j = 0; j < sd.lambdas.size(); ++j) acc += std::atan(sd.lambdas(j));
        return acc;
      },
      patch.domain());
}

inline PalmerReport verify_palmer(const GaussMapField& gm, const VectorXd& p) {
  const AngleSpectrum spec = angle_spectrum(gm, GaugeAt{}, p);
  const LagrangianSFF sff = second_fundamental_form(gm, spec, p);
  const LiftFrame lf = lift_frame(gm, p);
  const auto n = p.size();
  PalmerReport r;
  r.lhs = lf.g * spec.frame * sff.JH;
  r.rhs.resize(n);
  const RealMap field = arctan_sum_field(gm.patch);
  for (Eigen::Index i = 0; i < n; ++i)
    r.rhs(i) = directional_derivative_scalar(field, p, VectorXd::Unit(n, i), gm.plan().outer) /
               static_cast<double>(n);
  return r;
}

// ---------------------------------------------------------------------------
// derivatives of angles and frames

struct AlignedFrame {
  MatrixXd frame;  // coordinate vectors matched to a reference spectrum
  VectorXd theta;  // Rayleigh angles of the matched vectors, unwrapped near the reference
  MatrixXcd E;     // horizontal lifts of the frame vectors
  double split = 0.0;  // largest angle spread inside a reference cluster
};

/// The joint eigenframe at q, matched cluster by cluster to `ref` with an
/// orthogonal Procrustes rotation so that it varies smoothly in q.
inline AlignedFrame aligned_frame(const GaussMapField& gm, const GaugeAt& gauge, const VectorXd& q,
                                  const AngleSpectrum& ref) {
  const LiftFrame lf = lift_frame(gm, q);
  const AngleSpectrum sq = detail::spectrum_from(lf, gauge);
  const auto n = ref.theta.size();
  const int nclusters = *std::max_element(ref.cluster.begin(), ref.cluster.end()) + 1;
  std::vector<double> cluster_angle(nclusters);
  std::vector<std::vector<Eigen::Index>> ref_members(nclusters), q_members(nclusters);
  for (Eigen::Index j = 0; j < n; ++j) {
    cluster_angle[ref.cluster[j]] = ref.theta(j);
    ref_members[ref.cluster[j]].push_back(j);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    int best = 0;
    for (int c = 1; c < nclusters; ++c)
      if (dist_mod_pi(sq.theta(j), cluster_angle[c]) < dist_mod_pi(sq.theta(j), cluster_angle[best]))
        best = c;
    q_members[best].push_back(j);
  }
  AlignedFrame out;
  out.frame.resize(n, n);
  for (int c = 0; c < nclusters; ++c) {
    if (q_members[c].size() != ref_members[c].size())
      throw EigenCrossingError("angle branches cannot be matched near the reference point");
    const auto k = static_cast<Eigen::Index>(ref_members[c].size());
    MatrixXd Vq(n, k), Vp(n, k);
    for (Eigen::Index m = 0; m < k; ++m) {
      Vq.col(m) = sq.frame.col(q_members[c][m]);
      Vp.col(m) = ref.frame.col(ref_members[c][m]);
    }
    Eigen::JacobiSVD<MatrixXd> svd(Vq.transpose() * lf.g * Vp, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const MatrixXd R = svd.matrixU() * svd.matrixV().transpose();
    const MatrixXd aligned = Vq * R;
    for (Eigen::Index m = 0; m < k; ++m) out.frame.col(ref_members[c][m]) = aligned.col(m);
  }
  const StructureForms sf = structure_forms(lf, gauge);
  out.theta.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const VectorXd& v = out.frame.col(j);
    const double th = 0.5 * std::atan2(v.dot(sf.c * v), v.dot(sf.b * v));
    out.theta(j) = unwrap_near(th, ref.theta(j));
  }
  for (int c = 0; c < nclusters; ++c)
    for (auto j : ref_members[c])
      for (auto k : ref_members[c]) out.split = std::max(out.split, std::abs(out.theta(j) - out.theta(k)));
  out.E = lf.X * out.frame.cast<cplx>();
  return out;
}

struct ThetaDerivativeReport {
  // e_i(th_j - th_k) - (h_jj^i - h_kk^i)
  std::vector<double> derivative_residuals;
  // sin(th_j - th_k) w_j^k(e_i) - cos(th_j - th_k) h_ij^k
  std::vector<double> omega_residuals;
  std::vector<std::string> skipped;  // reasons, one per skipped relation

  double max_derivative() const {
    double m = 0.0;
    for (double v : derivative_residuals) m = std::max(m, std::abs(v));
    return m;
  }
  double max_omega() const {
    double m = 0.0;
    for (double v : omega_residuals) m = std::max(m, std::abs(v));
    return m;
  }
};

/// Checks e_i(th_j - th_k) = h_jj^i - h_kk^i (the one-form s cancels) and
/// sin(th_j - th_k) w_j^k(e_i) = cos(th_j - th_k) h_ij^k.
inline ThetaDerivativeReport verify_theta_derivatives(const GaussMapField& gm, const AngleSpectrum& spec,
                                                      const LagrangianSFF& sff, const VectorXd& p) {
  const auto n = spec.theta.size();
  const auto N = gm.lift(p).size();
  const GaugeAt gauge = spec.gauge;
  // theta (as real parts) followed by the stacked frame lifts
  ComplexMap field{[&gm, gauge, spec, n, N](const VectorXd& q) {
                     const AlignedFrame af = aligned_frame(gm, gauge, q, spec);
                     CVector out(n + N * n);
                     for (Eigen::Index j = 0; j < n; ++j) out(j) = af.theta(j);
                     for (Eigen::Index j = 0; j < n; ++j) out.segment(n + j * N, N) = af.E.col(j);
                     return out;
                   },
                   gm.patch.domain()};

  const LiftFrame lf = lift_frame(gm, p);
  const MatrixXcd E0 = lf.X * spec.frame.cast<cplx>();
  ThetaDerivativeReport r;

  std::vector<bool> split_cluster(n, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const VectorXd v = spec.frame.col(i);
    for (double t : {-1.0, 1.0}) {
      try {
        const AlignedFrame af = aligned_frame(gm, gauge, p + t * 2.0 * gm.plan().outer.step * v.normalized(), spec);
        if (af.split > 1e-5)
          for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = 0; k < n; ++k)
              if (j != k && spec.cluster[j] == spec.cluster[k] &&
                  std::abs(af.theta(j) - af.theta(k)) > 1e-5)
                split_cluster[j] = true;
      } catch (const EigenCrossingError&) {
        std::fill(split_cluster.begin(), split_cluster.end(), true);
      }
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    CVector d;
    try {
      d = directional_derivative(field, p, VectorXd(spec.frame.col(i)), gm.plan().outer);
    } catch (const EigenCrossingError& e) {
      r.skipped.push_back(std::string("EigenCrossingError: direction ") + std::to_string(i) + ": " +
                          e.what());
      continue;
    }
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = j + 1; k < n; ++k) {
        if (spec.cluster[j] == spec.cluster[k] && (split_cluster[j] || split_cluster[k])) {
          r.skipped.push_back("EigenCrossingError: repeated angle splits near the point (j=" +
                              std::to_string(j) + ", k=" + std::to_string(k) + ")");
          continue;
        }
        const double lhs = d(j).real() - d(k).real();
        const double rhs = sff(static_cast<int>(j), static_cast<int>(j), static_cast<int>(i)) -
                           sff(static_cast<int>(k), static_cast<int>(k), static_cast<int>(i));
        r.derivative_residuals.push_back(lhs - rhs);
      }
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k) {
        if (j == k) continue;
        const double dth = spec.theta(j) - spec.theta(k);
        if (std::abs(std::sin(dth)) < 1e-4) continue;
        const CVector dEj = d.segment(n + j * N, N);
        const double omega = hermitian_real(dEj, E0.col(k));
        r.omega_residuals.push_back(std::sin(dth) * omega -
                                    std::cos(dth) * sff(static_cast<int>(i), static_cast<int>(j),
                                                        static_cast<int>(k)));
      }
  }
  return r;
}

// ---------------------------------------------------------------------------
// curvature

/// K(e_i, e_j) = -2 cos^2(th_i - th_j) + g(h_ii, h_jj) - g(h_ij, h_ij).
inline double sectional_curvature(const AngleSpectrum& spec, const LagrangianSFF& sff, int i, int j) {
  if (i == j) throw ContractViolation("sectional_curvature: need i != j");
  const double c = std::cos(spec.theta(i) - spec.theta(j));
  double hh = 0.0, hij = 0.0;
  for (int k = 0; k < sff.n; ++k) {
    hh += sff(i, i, k) * sff(j, j, k);
    hij += sff(i, j, k) * sff(i, j, k);
  }
  return -2.0 * c * c + hh - hij;
}

/// Four-index tensor with index (((i*n + j)*n + k)*n + l).
struct Tensor4 {
  int n = 0;
  std::vector<double> v;
  explicit Tensor4(int dim = 0) : n(dim), v(static_cast<std::size_t>(dim) * dim * dim * dim, 0.0) {}
  double& operator()(int i, int j, int k, int l) { return v[((i * n + j) * n + k) * n + l]; }
  double operator()(int i, int j, int k, int l) const { return v[((i * n + j) * n + k) * n + l]; }
  Tensor4 to_frame(const MatrixXd& E) const {
    Tensor4 out(n);
    // contract one index at a time
    Tensor4 t = *this;
    for (int slot = 0; slot < 4; ++slot) {
      Tensor4 u(n);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c)
            for (int d = 0; d < n; ++d) {
              double acc = 0.0;
              for (int m = 0; m < n; ++m) {
                int idx[4] = {a, b, c, d};
                const int free = idx[slot];
                idx[slot] = m;
                acc += E(m, free) * t(idx[0], idx[1], idx[2], idx[3]);
              }
              u(a, b, c, d) = acc;
            }
      t = u;
    }
    out = t;
    return out;
  }
  double max_abs_diff(const Tensor4& o) const {
    double m = 0.0;
    for (std::size_t q = 0; q < v.size(); ++q) m = std::max(m, std::abs(v[q] - o.v[q]));
    return m;
  }
};

struct GaussCodazziReport {
  Tensor4 intrinsic;  // g(R(e_i,e_j)e_k, e_l) from finite-difference Christoffel symbols
  Tensor4 gauss_rhs;
  Tensor4 codazzi_lhs;  // g((Dh)(e_i,e_j,e_k) - (Dh)(e_j,e_i,e_k), J e_l)
  Tensor4 codazzi_rhs;
  double gauss_residual = 0.0;
  double codazzi_residual = 0.0;

  /// Intrinsic sectional curvature of span{e_i, e_j}.
  double sectional(int i, int j) const { return intrinsic(i, j, j, i); }
};

/// Metric g(X_i, X_j) of the Gauss map as a field (n*n entries, row-major).
inline RealMap gauss_metric_field(const GaussMapField& gm) {
  return {[gm](const VectorXd& q) {
            const LiftFrame lf = lift_frame(gm, q);
            return VectorXd(Eigen::Map<const VectorXd>(lf.g.data(), lf.g.size()));
          },
          gm.patch.domain()};
}

inline RealMap sff_field(const GaussMapField& gm) {
  return {[gm](const VectorXd& q) {
            const auto s = sff_coordinates(gm, q);
            return VectorXd(Eigen::Map<const VectorXd>(s.data(), static_cast<Eigen::Index>(s.size())));
          },
          gm.patch.domain()};
}

/// Intrinsic curvature g(R(d_i,d_j)d_k, d_l) of the Gauss-map metric, and the
/// Christoffel symbols Gamma^l_ij (index (l*n + i)*n + j), from finite
/// differences of the metric.
struct IntrinsicGeometry {
  MatrixXd g;
  std::vector<double> christoffel;
  Tensor4 riemann;
};

inline IntrinsicGeometry intrinsic_geometry(const GaussMapField& gm, const VectorXd& p) {
  const int n = static_cast<int>(p.size());
  const RealMap metric = gauss_metric_field(gm);
  const VectorXd g0 = metric(p);
  const MatrixXd dg = jacobian(metric, p, gm.plan().outer);    // (n*n) x n
  const auto d2g = hessian(metric, p, gm.plan().outer);
  auto G = [&](int a, int b) { return g0(b * n + a); };   // column-major storage, symmetric
  auto dG = [&](int c, int a, int b) { return dg(b * n + a, c); };
  auto d2G = [&](int c, int d, int a, int b) { return d2g(c, d)(b * n + a); };

  IntrinsicGeometry out;
  out.g.resize(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) out.g(a, b) = G(a, b);
  out.g = 0.5 * (out.g + out.g.transpose());
  const MatrixXd ginv = out.g.inverse();

  // Gamma_{m,jk} and its derivatives
  auto low = [&](int m, int j, int k) { return 0.5 * (dG(j, k, m) + dG(k, j, m) - dG(m, j, k)); };
  auto dlow = [&](int i, int m, int j, int k) {
    return 0.5 * (d2G(i, j, k, m) + d2G(i, k, j, m) - d2G(i, m, j, k));
  };
  std::vector<double> Gam(n * n * n, 0.0);
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int m = 0; m < n; ++m) acc += ginv(l, m) * low(m, j, k);
        Gam[(l * n + j) * n + k] = acc;
      }
  auto Gm = [&](int l, int j, int k) { return Gam[(l * n + j) * n + k]; };
  // d_i g^{lm} = -g^{la} d_i g_ab g^{bm}
  auto dginv = [&](int i, int l, int m) {
    double acc = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) acc -= ginv(l, a) * dG(i, a, b) * ginv(b, m);
    return acc;
  };
  auto dGam = [&](int i, int l, int j, int k) {
    double acc = 0.0;
    for (int m = 0; m < n; ++m) acc += dginv(i, l, m) * low(m, j, k) + ginv(l, m) * dlow(i, m, j, k);
    return acc;
  };
  // R^l_ijk = d_i Gam^l_jk - d_j Gam^l_ik + Gam^l_im Gam^m_jk - Gam^l_jm Gam^m_ik
  Tensor4 Rup(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double acc = dGam(i, l, j, k) - dGam(j, l, i, k);
          for (int m = 0; m < n; ++m) acc += Gm(l, i, m) * Gm(m, j, k) - Gm(l, j, m) * Gm(m, i, k);
          Rup(i, j, k, l) = acc;
        }
  out.riemann = Tensor4(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double acc = 0.0;
          for (int q = 0; q < n; ++q) acc += out.g(l, q) * Rup(i, j, k, q);
          out.riemann(i, j, k, l) = acc;
        }
  out.christoffel = std::move(Gam);
  return out;
}

/// Equations of Gauss and Codazzi for the Gauss map, both sides in the
/// spectrum frame. The left side of Gauss is the independent
/// finite-difference curvature of the induced metric.
inline GaussCodazziReport verify_gauss_codazzi(const GaussMapField& gm, const AngleSpectrum& spec,
                                               const LagrangianSFF& sff, const VectorXd& p) {
  const int n = static_cast<int>(p.size());
  const IntrinsicGeometry geo = intrinsic_geometry(gm, p);
  const LiftFrame lf = lift_frame(gm, p);
  const StructureForms sf = structure_forms(lf, spec.gauge);
  const MatrixXd b = 0.5 * (sf.b + sf.b.transpose());
  const MatrixXd c = 0.5 * (sf.c + sf.c.transpose());
  const MatrixXd& g = lf.g;
  const MatrixXd ginv = g.inverse();
  const auto& s = sff.sigma;
  auto S = [&](int i, int j, int k) { return s[(i * n + j) * n + k]; };
  auto hh = [&](int i, int j, int k, int l) {  // g(h(d_i,d_j), h(d_k,d_l))
    double acc = 0.0;
    for (int m = 0; m < n; ++m)
      for (int q = 0; q < n; ++q) acc += S(i, j, m) * ginv(m, q) * S(k, l, q);
    return acc;
  };

  // g(R(X,Y)Z,W) with X=d_i, Y=d_j, Z=d_k, W=d_l
  Tensor4 rhs(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          rhs(i, j, k, l) = -g(j, k) * g(i, l) + g(i, k) * g(j, l) - b(j, k) * b(i, l) +
                            b(i, k) * b(j, l) - c(j, k) * c(i, l) + c(i, k) * c(j, l) +
                            hh(j, k, i, l) - hh(i, k, j, l);

  // Codazzi: (nabla_i sigma)_jkl - (nabla_j sigma)_ikl
  const MatrixXd ds = jacobian(sff_field(gm), p, gm.plan().outer);  // (n^3) x n
  auto Gam = [&](int l, int i, int j) { return geo.christoffel[(l * n + i) * n + j]; };
  auto nabla = [&](int i, int j, int k, int l) {
    double acc = ds((j * n + k) * n + l, i);
    for (int m = 0; m < n; ++m)
      acc -= Gam(m, i, j) * S(m, k, l) + Gam(m, i, k) * S(j, m, l) + Gam(m, i, l) * S(j, k, m);
    return acc;
  };
  Tensor4 clhs(n), crhs(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          clhs(i, j, k, l) = nabla(i, j, k, l) - nabla(j, i, k, l);
          crhs(i, j, k, l) = b(j, k) * c(i, l) - b(i, k) * c(j, l) - c(j, k) * b(i, l) + c(i, k) * b(j, l);
        }

  GaussCodazziReport r;
  r.intrinsic = geo.riemann.to_frame(spec.frame);
  r.gauss_rhs = rhs.to_frame(spec.frame);
  r.codazzi_lhs = clhs.to_frame(spec.frame);
  r.codazzi_rhs = crhs.to_frame(spec.frame);
  r.gauss_residual = r.intrinsic.max_abs_diff(r.gauss_rhs);
  r.codazzi_residual = r.codazzi_lhs.max_abs_diff(r.codazzi_rhs);
  return r;
}

}  // namespace qgv
