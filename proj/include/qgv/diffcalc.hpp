#pragma once

// Central finite differences for vector-valued maps on boxes of R^k.
//
// Every map carries its domain so that stencils can be rejected before they
// leave it. Nested differentiation (a map whose evaluator itself differences
// another map) is the normal mode of use; callers pick a larger step for each
// outer level so that roundoff of the inner level is not amplified.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "qgv/errors.hpp"

namespace qgv {

/// Axis-aligned box [lo_i, hi_i].
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Eigen::Index dim() const { return lo.size(); }
  Eigen::VectorXd center() const { return 0.5 * (lo + hi); }
  double shortest_side() const { return (hi - lo).minCoeff(); }
  bool contains(const Eigen::VectorXd& p, double margin = 0.0) const {
    for (Eigen::Index i = 0; i < dim(); ++i)
      if (p(i) < lo(i) + margin || p(i) > hi(i) - margin) return false;
    return true;
  }
  static Box uniform(Eigen::Index k, double lo, double hi) {
    return {Eigen::VectorXd::Constant(k, lo), Eigen::VectorXd::Constant(k, hi)};
  }
};

/// A map from a box of R^k into Scalar^m, promised C^3 on the box.
/// The evaluator must be re-entrant.
template <class Scalar>
struct SmoothMap {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  std::function<Vector(const Eigen::VectorXd&)> eval;
  Box domain;

  Vector operator()(const Eigen::VectorXd& p) const { return eval(p); }
  Eigen::Index params() const { return domain.dim(); }
};

using RealMap = SmoothMap<double>;
using ComplexMap = SmoothMap<std::complex<double>>;

struct DiffConfig {
  double step = 1e-3;
  int order = 4;  // 2 or 4
  bool richardson = false;
};

namespace detail {

struct Stencil {
  std::vector<int> offsets;
  std::vector<double> weights;  // already divided by the integer denominator
};

inline const Stencil& first_stencil(int order) {
  static const Stencil o2{{-1, 1}, {-0.5, 0.5}};
  static const Stencil o4{{-2, -1, 1, 2}, {1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12}};
  return order == 2 ? o2 : o4;
}

inline const Stencil& second_stencil(int order) {
  static const Stencil o2{{-1, 0, 1}, {1.0, -2.0, 1.0}};
  static const Stencil o4{{-2, -1, 0, 1, 2},
                          {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12}};
  return order == 2 ? o2 : o4;
}

inline void check_config(const DiffConfig& cfg, const Box& box) {
  if (cfg.order != 2 && cfg.order != 4)
    throw ContractViolation("DiffConfig: order must be 2 or 4");
  if (!(cfg.step > 0.0))
    throw ContractViolation("DiffConfig: step must be positive");
  if (cfg.step >= 0.5 * box.shortest_side())
    throw ContractViolation("DiffConfig: step must be below half the shortest box side");
}

inline void check_margin(const Box& box, const Eigen::VectorXd& p, double margin,
                         const char* op) {
  if (p.size() != box.dim())
    throw ContractViolation(std::string(op) + ": point has wrong dimension");
  if (!box.contains(p, margin))
    throw DomainError(std::string(op) + ": point closer than " + std::to_string(margin) +
                      " to the domain boundary");
}

// One application of a stencil (no Richardson).
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> first_partial(const SmoothMap<Scalar>& f,
                                                       const Eigen::VectorXd& p,
                                                       const Eigen::VectorXd& dir, double h,
                                                       int order) {
  const auto& st = first_stencil(order);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> acc;
  for (std::size_t s = 0; s < st.offsets.size(); ++s) {
    auto val = f(p + (st.offsets[s] * h) * dir);
    if (s == 0)
      acc = Scalar(st.weights[s]) * val;
    else
      acc += Scalar(st.weights[s]) * val;
  }
  return acc / Scalar(h);
}

template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> second_partial(const SmoothMap<Scalar>& f,
                                                        const Eigen::VectorXd& p, Eigen::Index i,
                                                        Eigen::Index j, double h, int order) {
  const Eigen::Index k = p.size();
  Eigen::VectorXd ei = Eigen::VectorXd::Unit(k, i);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> acc;
  bool first = true;
  auto add = [&](double w, const Eigen::VectorXd& q) {
    auto val = f(q);
    if (first) {
      acc = Scalar(w) * val;
      first = false;
    } else {
      acc += Scalar(w) * val;
    }
  };
  if (i == j) {
    const auto& st = second_stencil(order);
    for (std::size_t s = 0; s < st.offsets.size(); ++s)
      add(st.weights[s], p + (st.offsets[s] * h) * ei);
  } else {
    Eigen::VectorXd ej = Eigen::VectorXd::Unit(k, j);
    const auto& st = first_stencil(order);
    for (std::size_t a = 0; a < st.offsets.size(); ++a)
      for (std::size_t b = 0; b < st.offsets.size(); ++b)
        add(st.weights[a] * st.weights[b], p + (st.offsets[a] * h) * ei + (st.offsets[b] * h) * ej);
  }
  return acc / Scalar(h * h);
}

template <class Vec, class Fn>
Vec with_richardson(const DiffConfig& cfg, Fn&& at_step) {
  if (!cfg.richardson) return at_step(cfg.step);
  const double gain = std::pow(2.0, cfg.order);
  Vec coarse = at_step(cfg.step);
  Vec fine = at_step(0.5 * cfg.step);
  return (gain * fine - coarse) / (gain - 1.0);
}

}  // namespace detail

/// Columns are the partials d f / d u_i at p. Error O(step^order).
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> jacobian(const SmoothMap<Scalar>& f,
                                                               const Eigen::VectorXd& p,
                                                               const DiffConfig& cfg = {}) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  detail::check_config(cfg, f.domain);
  detail::check_margin(f.domain, p, 2.0 * cfg.step, "jacobian");
  const Eigen::Index k = p.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> J;
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::VectorXd ei = Eigen::VectorXd::Unit(k, i);
    Vec col = detail::with_richardson<Vec>(
        cfg, [&](double h) { return detail::first_partial(f, p, ei, h, cfg.order); });
    if (i == 0) J.resize(col.size(), k);
    J.col(i) = col;
  }
  return J;
}

/// Second partials d_i d_j f at p, stored symmetric.
template <class Scalar>
struct Hessian {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Eigen::Index n = 0;
  std::vector<Vector> entries;  // row-major n x n

  const Vector& operator()(Eigen::Index i, Eigen::Index j) const { return entries[i * n + j]; }
  Vector& operator()(Eigen::Index i, Eigen::Index j) { return entries[i * n + j]; }
};

/// Diagonal entries use the direct second-difference stencil, mixed entries
/// nested first differences (identical stencil for (i,j) and (j,i)).
template <class Scalar>
Hessian<Scalar> hessian(const SmoothMap<Scalar>& f, const Eigen::VectorXd& p,
                        const DiffConfig& cfg = {}) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  detail::check_config(cfg, f.domain);
  detail::check_margin(f.domain, p, 4.0 * cfg.step, "hessian");
  const Eigen::Index k = p.size();
  Hessian<Scalar> H;
  H.n = k;
  H.entries.resize(k * k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i; j < k; ++j) {
      Vec v = detail::with_richardson<Vec>(
          cfg, [&](double h) { return detail::second_partial(f, p, i, j, h, cfg.order); });
      H(i, j) = v;
      H(j, i) = v;
    }
  return H;
}

/// d/dt f(p + t v) at t = 0.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> directional_derivative(const SmoothMap<Scalar>& f,
                                                                const Eigen::VectorXd& p,
                                                                const Eigen::VectorXd& v,
                                                                const DiffConfig& cfg = {}) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  detail::check_config(cfg, f.domain);
  if (v.size() != p.size())
    throw ContractViolation("directional_derivative: direction has wrong dimension");
  detail::check_margin(f.domain, p, 2.0 * cfg.step, "directional_derivative");
  // stencil along the unit direction so the sample spread does not grow with |v|
  const double len = v.norm();
  if (len == 0.0) return Vec::Zero(f.eval(p).size());
  const Eigen::VectorXd u = v / len;
  return len * detail::with_richardson<Vec>(
                   cfg, [&](double h) { return detail::first_partial(f, p, u, h, cfg.order); });
}

/// Scalar-field convenience: first output component.
inline double directional_derivative_scalar(const RealMap& phi, const Eigen::VectorXd& p,
                                            const Eigen::VectorXd& v, const DiffConfig& cfg = {}) {
  return directional_derivative(phi, p, v, cfg)(0);
}

/// Wraps a scalar function as a one-output RealMap.
inline RealMap scalar_field(std::function<double(const Eigen::VectorXd&)> fn, Box domain) {
  return {[fn = std::move(fn)](const Eigen::VectorXd& p) {
            Eigen::VectorXd out(1);
            out(0) = fn(p);
            return out;
          },
          std::move(domain)};
}

}  // namespace qgv

namespace qgv {

/// Steps used at each nesting level of the geometric pipeline.
///
/// The unit normal differences the chart once; the Gauss-map lift contains
/// the normal, so its derivatives are one level deeper, and curvature of the
/// lift-induced metric is two levels deeper again. Roundoff of a level of
/// size eps is amplified by step^-k at the next, so outer steps grow.
struct StencilPlan {
  DiffConfig normal{1e-3, 4, false};  // d a, for the normal
  DiffConfig shape{2e-3, 4, false};   // d^2 a, for the shape operator
  DiffConfig lift{2e-3, 4, false};    // d of the lift
  DiffConfig lift2{5e-3, 4, false};   // d^2 of the lift
  DiffConfig outer{2e-2, 4, false};   // derivatives of derived fields
};

}  // namespace qgv
