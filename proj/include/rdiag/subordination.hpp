#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rdiag/error.hpp"
#include "rdiag/extended.hpp"
#include "rdiag/measures.hpp"
#include "rdiag/roots.hpp"
#include "rdiag/transforms.hpp"

namespace rdiag {

/// k(s, t) = (s - t)(1/h(s) - s + t) for the symmetrized law mu~ of |T|.
///
/// Evaluated as (s - t)((1 - s h(s)) / h(s) + t) so that the large-s regime,
/// where 1/h(s) and s nearly cancel, keeps full relative precision.
class KFunction {
 public:
  explicit KFunction(SymmetricMeasure mu) : mu_(std::move(mu)), bounds_(lambda_bounds(mu_.base())) {}
  explicit KFunction(const MeasureRPlus& mu_abs) : KFunction(symmetrize(mu_abs)) {}

  const SymmetricMeasure& measure() const { return mu_; }
  const LambdaBounds& bounds() const { return bounds_; }
  bool is_dirac() const { return bounds_.dirac; }

  double h(double s) const { return h_values(mu_, s).h; }

  // k and dk/ds at s = t + gap.
  std::pair<double, double> eval_gap(double gap, double t) const {
    const HValues hv = h_values(mu_, t + gap);
    const double q = hv.one_minus_sh / hv.h;
    const double dq = (hv.d_one_minus_sh * hv.h - hv.one_minus_sh * hv.dh) / (hv.h * hv.h);
    return {gap * (q + t), (q + t) + gap * dq};
  }

  double operator()(double s, double t) const {
    if (!(s > 0.0)) fail(ErrorCode::domain_error, "k requires s > 0");
    return eval_gap(s - t, t).first;
  }

 private:
  SymmetricMeasure mu_;
  LambdaBounds bounds_;
};

inline double k_eval(const KFunction& kf, double s, double t) {
  if (!(t >= 0.0)) fail(ErrorCode::domain_error, "k requires t >= 0");
  return kf(s, t);
}

struct SubordinationResult {
  double r = 0.0;
  double t = 0.0;
  double s = 0.0;
  double gap = 0.0;  // s - t, carried separately since it can be far below eps * t
  double residual = 0.0;
  cplx omega1;
  cplx omega2;
};

namespace detail {

constexpr double root_rel_tol = 1e-14;
constexpr int root_max_iter = 400;

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0)) fail(ErrorCode::domain_error, std::string(what) + " must be > 0");
}

inline void require_not_dirac(const KFunction& kf) {
  if (kf.is_dirac()) fail(ErrorCode::dirac_measure, "operation undefined for a Dirac measure");
}

}  // namespace detail

/// s(r, t) for t > 0: the unique s in (t, inf) with k(s, t) = r^2, found by
/// monotone bracketing in the gap s - t.
inline SubordinationResult solve_s(const KFunction& kf, double r, double t) {
  detail::require_positive(r, "r");
  detail::require_positive(t, "t");
  detail::require_not_dirac(kf);
  const double target = r * r;
  auto f = [&](double gap) { return kf.eval_gap(gap, t); };

  double lo = t * 1e-9;
  while (f(lo).first >= target) {
    lo *= 1.0 / 16.0;
    if (lo < 1e-300) fail(ErrorCode::no_convergence, "solve_s: cannot bracket the root from below");
  }
  double hi = std::max(2.0 * t, 1.0) - t;
  while (f(hi).first <= target) {
    hi *= 2.0;
    if (hi > 1e150) fail(ErrorCode::no_convergence, "solve_s: cannot bracket the root from above");
  }
  roots::Options opt;
  opt.f_tol = detail::root_rel_tol * std::max(1.0, target);
  opt.max_iter = detail::root_max_iter;
  const auto root = roots::solve_monotone(f, target, lo, hi, opt);

  SubordinationResult res;
  res.r = r;
  res.t = t;
  res.gap = root.x;
  res.s = t + root.x;
  res.residual = std::abs(f(root.x).first - target);
  res.omega1 = {0.0, res.s};
  res.omega2 = {0.0, target / res.gap};
  return res;
}

/// s(r, 0): 0 for r <= lambda1, the root of k(s, 0) = r^2 inside the
/// annulus, +inf beyond lambda2.
///
/// A quadrature approximation of a density whose inner radius is 0 still has
/// a tiny positive inner radius of its own; below it no root exists and the
/// zero branch is returned.
inline Extended s_at_zero(const KFunction& kf, double r) {
  detail::require_positive(r, "r");
  detail::require_not_dirac(kf);
  const LambdaBounds& lb = kf.bounds();
  if (r <= lb.lambda1) return 0.0;
  if (lb.lambda2.is_finite() && r >= lb.lambda2.value()) return Extended::pos_infinity();

  const double target = r * r;
  auto f = [&](double s) { return kf.eval_gap(s, 0.0); };
  double lo = 1.0;
  while (f(lo).first >= target) {
    lo *= 0.25;
    if (lo < 1e-150) return 0.0;
  }
  double hi = 1.0;
  while (f(hi).first <= target) {
    hi *= 4.0;
    if (hi > 1e150) return Extended::pos_infinity();
  }
  roots::Options opt;
  opt.f_tol = detail::root_rel_tol * target;
  opt.max_iter = detail::root_max_iter;
  return roots::solve_monotone(f, target, lo, hi, opt).x;
}

struct FixedPointOptions {
  double tol = 1e-13;  // on successive iterates, relative to max(1, |omega|)
  int max_iter = 100000;
  // Aitken extrapolation every third iterate (Steffensen). The plain map
  // contracts at a rate close to 1 when s(r, t) is large, i.e. outside the
  // annulus at small t.
  bool accelerate = true;
};

/// omega_1(it) by iterating omega <- it - r^2 / (it + F(omega) - omega),
/// F = 1/G of mu~, starting from omega = it.
inline cplx fixed_point_omega1(const SymmetricMeasure& mu, double r, double t, const FixedPointOptions& opt = {}) {
  detail::require_positive(r, "r");
  detail::require_positive(t, "t");
  const cplx z{0.0, t};
  const double r2 = r * r;
  auto map = [&](cplx w) { return z - r2 / (z + reciprocal_cauchy_minus_z(mu, w)); };
  cplx omega = z;
  cplx prev1 = omega;
  cplx prev2 = omega;
  double last_step = std::numeric_limits<double>::infinity();
  int run = 0;  // plain steps since the last extrapolation
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    const cplx next = map(omega);
    const double step = std::abs(next - omega);
    prev2 = prev1;
    prev1 = omega;
    omega = next;
    // Distance to the fixed point is about step q/(1-q), q the observed
    // contraction; with q near 1 a small step alone proves little.
    const double q = step / last_step;
    const double bound = opt.tol * std::max(1.0, std::abs(omega));
    if (step == 0.0 || (q < 1.0 && step * q / (1.0 - q) < bound && step < bound)) return omega;
    last_step = step;
    if (opt.accelerate && ++run >= 2) {
      run = 0;
      // prev2, prev1, omega are three consecutive plain iterates
      const cplx d2 = omega - 2.0 * prev1 + prev2;
      if (std::abs(d2) > 0.0) {
        const cplx jump = omega - (omega - prev1) * (omega - prev1) / d2;
        if (std::isfinite(jump.real()) && std::isfinite(jump.imag()) && jump.imag() > t) {
          prev1 = omega;
          omega = jump;
          last_step = std::numeric_limits<double>::infinity();
        }
      }
    }
  }
  fail(ErrorCode::no_convergence, "fixed_point_omega1: iteration cap reached");
}

inline cplx omega2_eval(const KFunction& kf, double r, double t) { return solve_s(kf, r, t).omega2; }

enum class BoundaryRegime { inner, outer };

struct BoundaryDiagnostics {
  BoundaryRegime regime = BoundaryRegime::inner;
  std::vector<double> t_values;
  std::vector<double> samples;  // t/s(r,t) (inner) or s(r,t) t (outer)
  double extrapolated = 0.0;
  double closed_form = 0.0;
  double deviation = 0.0;
};

/// Small-t limits of t/s(r,t) for r <= lambda1 and of s(r,t) t for
/// r >= lambda2, sampled at t = 1e-3 ... 1e-7 and extrapolated to t = 0.
///
/// The samples are even in t to leading order, so the extrapolation is a
/// two-level Richardson table in t^2 over the three smallest t.
inline BoundaryDiagnostics boundary_diagnostics(const KFunction& kf, double r) {
  detail::require_positive(r, "r");
  detail::require_not_dirac(kf);
  const LambdaBounds& lb = kf.bounds();
  BoundaryDiagnostics out;
  if (r <= lb.lambda1) {
    out.regime = BoundaryRegime::inner;
    const double l1sq = lb.lambda1 * lb.lambda1;
    out.closed_form = (l1sq - r * r) / l1sq;
  } else if (lb.lambda2.is_finite() && r >= lb.lambda2.value()) {
    out.regime = BoundaryRegime::outer;
    out.closed_form = r * r - lb.lambda2.value() * lb.lambda2.value();
  } else {
    fail(ErrorCode::regime_error, "boundary limits only exist outside the open annulus");
  }
  for (double t = 1e-3; t > 0.5e-7; t *= 0.1) {
    const SubordinationResult sr = solve_s(kf, r, t);
    out.t_values.push_back(t);
    out.samples.push_back(out.regime == BoundaryRegime::inner ? t / sr.s : sr.s * t);
  }
  const std::size_t n = out.samples.size();
  const double ratio = out.t_values[n - 2] / out.t_values[n - 1];
  const double q = ratio * ratio;  // t^2 step between neighbours
  const double a0 = out.samples[n - 3];
  const double a1 = out.samples[n - 2];
  const double a2 = out.samples[n - 1];
  const double b1 = (q * a1 - a0) / (q - 1.0);
  const double b2 = (q * a2 - a1) / (q - 1.0);
  out.extrapolated = (q * q * b2 - b1) / (q * q - 1.0);
  out.deviation = std::abs(out.extrapolated - out.closed_form);
  return out;
}

struct GrowthBounds {
  double c1 = 0.0;
  double c2 = 0.0;
  // Smallest grid t from which the large-t quadratic branch for s - t holds
  // all the way up; empty if it fails already at the largest grid point.
  std::optional<double> t_lambda;
  // |lambda|^2 h(s) < s - t < 2 |lambda|^2 h(s) on every grid t >= t_lambda.
  bool large_t_bounds_hold = false;
};

namespace detail {

// s - t from the "+" branch of the quadratic in s - t, written without
// cancellation: 2 r^2 h / (1 + sqrt(1 - 4 r^2 h^2)).
inline std::optional<double> large_t_branch(double r, double h) {
  const double disc = 1.0 - 4.0 * r * r * h * h;
  if (disc < 0.0) return std::nullopt;
  return 2.0 * r * r * h / (1.0 + std::sqrt(disc));
}

}  // namespace detail

/// Empirical constants C1 <= (s - t) / min(1, 1/t) <= C2 over t_grid, plus
/// the large-t branch scan.
inline GrowthBounds subordination_growth_bounds(const KFunction& kf, double r, std::vector<double> t_grid) {
  detail::require_positive(r, "r");
  detail::require_not_dirac(kf);
  const LambdaBounds& lb = kf.bounds();
  if (!lb.lambda2.is_finite()) fail(ErrorCode::domain_error, "growth bounds need a compactly supported measure");
  if (!(r > lb.lambda1 && r < lb.lambda2.value())) {
    fail(ErrorCode::regime_error, "growth bounds need r inside the open annulus");
  }
  if (t_grid.empty()) fail(ErrorCode::domain_error, "empty t grid");
  std::sort(t_grid.begin(), t_grid.end());

  GrowthBounds out;
  out.c1 = std::numeric_limits<double>::infinity();
  out.c2 = 0.0;
  std::vector<SubordinationResult> results;
  results.reserve(t_grid.size());
  for (double t : t_grid) {
    detail::require_positive(t, "t");
    results.push_back(solve_s(kf, r, t));
    const double ratio = results.back().gap / std::min(1.0, 1.0 / t);
    out.c1 = std::min(out.c1, ratio);
    out.c2 = std::max(out.c2, ratio);
  }

  // Scan down from the largest t while the branch formula reproduces s - t.
  constexpr double branch_tol = 1e-9;
  for (std::size_t i = results.size(); i-- > 0;) {
    const auto& sr = results[i];
    const auto branch = detail::large_t_branch(r, kf.h(sr.s));
    if (!branch || std::abs(*branch - sr.gap) > branch_tol * sr.gap) break;
    out.t_lambda = sr.t;
  }
  if (out.t_lambda) {
    out.large_t_bounds_hold = true;
    for (const auto& sr : results) {
      if (sr.t < *out.t_lambda) continue;
      const double rh = r * r * kf.h(sr.s);
      if (!(rh < sr.gap && sr.gap < 2.0 * rh)) out.large_t_bounds_hold = false;
    }
  }
  return out;
}

}  // namespace rdiag
