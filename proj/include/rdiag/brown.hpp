#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "rdiag/error.hpp"
#include "rdiag/extended.hpp"
#include "rdiag/measures.hpp"
#include "rdiag/quadrature.hpp"
#include "rdiag/subordination.hpp"
#include "rdiag/transforms.hpp"

namespace rdiag {

/// Radial description of the Brown measure of an R-diagonal T.
struct RadialBrownMeasure {
  struct Row {
    double r = 0.0;
    double cdf = 0.0;
    double density = 0.0;  // dCDF/dr = 2 pi r * planar density
  };
  double lambda1 = 0.0;
  Extended lambda2 = 0.0;
  double zero_mass = 0.0;
  std::vector<Row> grid;
};

struct DeterminantValue {
  cplx lambda;
  double t = 0.0;
  Extended log_delta;
};

namespace detail {

inline void require_nonzero(cplx lambda) {
  if (lambda == cplx(0.0, 0.0)) fail(ErrorCode::domain_error, "lambda must be nonzero");
}

// Regime of |lambda| relative to the annulus (lambda1, lambda2). The seams
// follow the closed/open pattern of the determinant formula: r <= lambda1 is
// inner, r >= lambda2 is outer.
enum class Annulus { inner, inside, outer };

inline Annulus classify(const LambdaBounds& lb, double r) {
  if (r <= lb.lambda1) return Annulus::inner;
  if (lb.lambda2.is_finite() && r >= lb.lambda2.value()) return Annulus::outer;
  return Annulus::inside;
}

}  // namespace detail

/// mu_T{|lambda| <= r} = s(r,0)^2 / (s(r,0)^2 + r^2), with s(r,0) = 0 and
/// +inf giving 0 and 1. An atom of mu_|T| at 0 shows up as cdf(0+) = delta
/// without special casing.
inline double radial_cdf(const KFunction& kf, double r) {
  const Extended s0 = s_at_zero(kf, r);
  if (s0.is_pos_inf()) return 1.0;
  const double s = s0.value();
  if (s == 0.0) return 0.0;
  // s^2/(s^2+r^2) written to stay accurate when s >> r
  const double q = r / s;
  return 1.0 / (1.0 + q * q);
}

inline double radial_cdf(const MeasureRPlus& mu_abs, double r) { return radial_cdf(KFunction(mu_abs), r); }

/// 1 + S^{-1}_{mu_{T*T}}(r^-2), clamped to 0 and 1 outside the annulus.
inline double radial_cdf_via_s_transform(const MeasureRPlus& mu_sq, const LambdaBounds& lb, double r) {
  if (!(r > 0.0)) fail(ErrorCode::domain_error, "r must be > 0");
  if (lb.dirac) fail(ErrorCode::dirac_measure, "Brown measure route needs a non-Dirac measure");
  switch (detail::classify(lb, r)) {
    case detail::Annulus::inner: return 0.0;
    case detail::Annulus::outer: return 1.0;
    case detail::Annulus::inside: break;
  }
  return s_transform_inverse_full(mu_sq, 1.0 / (r * r)).one_plus_w;
}

inline double radial_cdf_via_s_transform(const MeasureRPlus& mu_abs, double r) {
  return radial_cdf_via_s_transform(pushforward_square(mu_abs), lambda_bounds(mu_abs), r);
}

/// Planar Brown density at |lambda| = r inside the annulus:
/// -(S^{-1})'(r^-2) / (pi r^4). The radial CDF derivative is 2 pi r times it.
inline double radial_density(const MeasureRPlus& mu_sq, const LambdaBounds& lb, double r) {
  if (!(r > 0.0)) fail(ErrorCode::domain_error, "r must be > 0");
  if (lb.dirac) fail(ErrorCode::dirac_measure, "Brown measure density needs a non-Dirac measure");
  if (detail::classify(lb, r) != detail::Annulus::inside) {
    fail(ErrorCode::regime_error, "radial_density is only defined inside the open annulus");
  }
  const SInverse inv = s_transform_inverse_full(mu_sq, 1.0 / (r * r));
  const double r2 = r * r;
  return -inv.dw_dy / (std::numbers::pi * r2 * r2);
}

inline double radial_density(const MeasureRPlus& mu_abs, double r) {
  return radial_density(pushforward_square(mu_abs), lambda_bounds(mu_abs), r);
}

/// log Delta(T*T + s^2) = int log(u^2 + s^2) dmu_|T|(u), split as
/// 2 log s + int log1p(u^2/s^2) so that large s stays exact.
inline double log_det_shifted(const MeasureRPlus& mu_abs, double s) {
  const double inv = 1.0 / s;
  return 2.0 * std::log(s) + mu_abs.integrate_positive([inv](double u) {
    const double q = u * inv;
    return std::log1p(q * q);
  });
}

// log Delta(T) = int log u dmu_|T|; -inf when there is an atom at 0.
inline Extended log_det_of(const MeasureRPlus& mu_abs) {
  if (mu_abs.zero_atom() > 0.0) return Extended::neg_infinity();
  return mu_abs.integrate_positive([](double u) { return std::log(u); });
}

/// log Delta((T - lambda)*(T - lambda) + t^2) for t > 0.
inline DeterminantValue fk_det_regularized(const KFunction& kf, cplx lambda, double t) {
  detail::require_nonzero(lambda);
  const double r = std::abs(lambda);
  const SubordinationResult sr = solve_s(kf, r, t);
  const double ratio = sr.gap / r;
  DeterminantValue out{lambda, t, 0.0};
  out.log_delta = -std::log1p(ratio * ratio) + log_det_shifted(kf.measure().base(), sr.s);
  return out;
}

/// log Delta(T - lambda) from the three-regime formula.
inline DeterminantValue fk_det(const KFunction& kf, cplx lambda) {
  detail::require_nonzero(lambda);
  detail::require_not_dirac(kf);
  const double r = std::abs(lambda);
  DeterminantValue out{lambda, 0.0, 0.0};
  switch (detail::classify(kf.bounds(), r)) {
    case detail::Annulus::outer: out.log_delta = std::log(r); return out;
    case detail::Annulus::inner: out.log_delta = log_det_of(kf.measure().base()); return out;
    case detail::Annulus::inside: break;
  }
  const Extended s0 = s_at_zero(kf, r);
  if (s0.is_pos_inf()) {
    out.log_delta = std::log(r);
  } else if (s0.value() == 0.0) {
    out.log_delta = log_det_of(kf.measure().base());
  } else {
    const double s = s0.value();
    const double ratio = s / r;
    out.log_delta = 0.5 * (-std::log1p(ratio * ratio) + log_det_shifted(kf.measure().base(), s));
  }
  return out;
}

/// (tau((lambda - T)[|lambda - T|^2 + t^2]^-1), tau((lambda - T)*[...]^-1)).
inline std::pair<cplx, cplx> resolvent_traces(const KFunction& kf, cplx lambda, double t) {
  detail::require_nonzero(lambda);
  const double r = std::abs(lambda);
  const SubordinationResult sr = solve_s(kf, r, t);
  const double r2 = r * r;
  const double g2 = sr.gap * sr.gap;
  const double factor = g2 / (r2 + g2) / r2;
  return {lambda * factor, std::conj(lambda) * factor};
}

/// The t -> 0 values of resolvent_traces.
inline std::pair<cplx, cplx> resolvent_traces_limit(const KFunction& kf, cplx lambda) {
  detail::require_nonzero(lambda);
  detail::require_not_dirac(kf);
  const double r = std::abs(lambda);
  const double r2 = r * r;
  double mass = 0.0;
  switch (detail::classify(kf.bounds(), r)) {
    case detail::Annulus::inner: mass = 0.0; break;
    case detail::Annulus::outer: mass = 1.0; break;
    case detail::Annulus::inside: mass = radial_cdf(kf, r); break;
  }
  return {lambda * (mass / r2), std::conj(lambda) * (mass / r2)};
}

/// tau([(T - lambda)*(T - lambda)]^-1); +inf-tagged inside the annulus and on
/// its boundary circles.
inline Extended negative_moment_first(const KFunction& kf, cplx lambda) {
  detail::require_nonzero(lambda);
  detail::require_not_dirac(kf);
  const LambdaBounds& lb = kf.bounds();
  const double r = std::abs(lambda);
  const double r2 = r * r;
  switch (detail::classify(lb, r)) {
    // squared radii straight from the moments, not re-squared square roots
    case detail::Annulus::inner: {
      const double gap = 1.0 / kf.measure().base().moment(-2.0).value() - r2;
      if (gap > 1e-14 * r2) return 1.0 / gap;  // below that, on the circle up to rounding
      return Extended::pos_infinity();
    }
    case detail::Annulus::outer: {
      const double gap = r2 - kf.measure().base().moment(2.0).value();
      if (gap > 1e-14 * r2) return 1.0 / gap;  // below that, on the circle up to rounding
      return Extended::pos_infinity();
    }
    case detail::Annulus::inside: break;
  }
  return Extended::pos_infinity();
}

/// Radii of the R-diagonal element whose modulus has the law of |T - lambda|:
///   lambda2^2 = lambda2(mu)^2 + |lambda|^2  (second moments add)
///   lambda1^-2 = tau([(T - lambda)*(T - lambda)]^-1)
inline LambdaBounds shifted_lambda_bounds(const KFunction& kf, cplx lambda) {
  LambdaBounds out;
  const LambdaBounds& lb = kf.bounds();
  const double r = std::abs(lambda);
  out.lambda2 = lb.lambda2.is_finite() ? Extended(std::sqrt(lb.lambda2.value() * lb.lambda2.value() + r * r))
                                       : Extended::pos_infinity();
  const Extended neg = negative_moment_first(kf, lambda);
  out.lambda1 = neg.is_finite() ? 1.0 / std::sqrt(neg.value()) : 0.0;
  return out;
}

/// Numerical counterpart of shifted_lambda_bounds through the subordination
/// limits h_lambda(t)/t (t -> 0) and t^2 (1 - t h_lambda(t)) (t -> inf),
/// where h_lambda(t) = h(s(|lambda|, t)).
struct ShiftedMoments {
  double inverse_square = 0.0;  // at t_small
  double square = 0.0;          // at t_large
};

inline ShiftedMoments shifted_moments_numeric(const KFunction& kf, cplx lambda, double t_small, double t_large) {
  detail::require_nonzero(lambda);
  const double r = std::abs(lambda);
  ShiftedMoments out;
  const SubordinationResult lo = solve_s(kf, r, t_small);
  out.inverse_square = kf.h(lo.s) / t_small;
  const SubordinationResult hi = solve_s(kf, r, t_large);
  const HValues hv = h_values(kf.measure(), hi.s);
  // 1 - t h(s) = (s - t)/s + (t/s)(1 - s h(s))
  const double one_minus = hi.gap / hi.s + (t_large / hi.s) * hv.one_minus_sh;
  out.square = t_large * t_large * one_minus;
  return out;
}

/// Scalar entry delta(lambda, eps) = Im omega_2(i eps) = |lambda|^2 / (s - eps)
/// of the 2x2 Hermitian reduction.
inline double hermitian_reduction_delta(const KFunction& kf, cplx lambda, double eps) {
  detail::require_nonzero(lambda);
  const double r = std::abs(lambda);
  const SubordinationResult sr = solve_s(kf, r, eps);
  return r * r / sr.gap;
}

/// Both sides of the three entry identities of the reduction: the left sides
/// from delta, the right sides from the h-transform and resolvent traces.
struct HermitianReductionEntries {
  double delta = 0.0;
  double diag_lhs = 0.0;  // delta / (delta^2 + |lambda|^2)
  double diag_rhs = 0.0;  // eps tau([AA* + eps^2]^-1) = h(s(|lambda|, eps))
  cplx off_lhs;           // lambda / (delta^2 + |lambda|^2)
  cplx off_rhs;           // tau(A [A*A + eps^2]^-1)
  cplx off_conj_lhs;
  cplx off_conj_rhs;      // tau(A* [AA* + eps^2]^-1)
};

inline HermitianReductionEntries hermitian_reduction_entries(const KFunction& kf, cplx lambda, double eps) {
  detail::require_nonzero(lambda);
  const double r = std::abs(lambda);
  const double r2 = r * r;
  const SubordinationResult sr = solve_s(kf, r, eps);
  HermitianReductionEntries e;
  e.delta = r2 / sr.gap;
  const double den = e.delta * e.delta + r2;
  e.diag_lhs = e.delta / den;
  e.diag_rhs = kf.h(sr.s);
  e.off_lhs = lambda / den;
  e.off_conj_lhs = std::conj(lambda) / den;
  const auto traces = resolvent_traces(kf, lambda, eps);
  e.off_rhs = traces.first;
  e.off_conj_rhs = traces.second;
  return e;
}

/// r-grid over the support of the Brown measure. When lambda2 is infinite the
/// upper end is the radius where the CDF first exceeds 1 - 1e-6.
inline std::vector<double> annulus_grid(const KFunction& kf, int n_points) {
  const LambdaBounds& lb = kf.bounds();
  double hi = 0.0;
  if (lb.lambda2.is_finite()) {
    hi = lb.lambda2.value();
  } else {
    hi = std::max(1.0, 2.0 * lb.lambda1);
    while (radial_cdf(kf, hi) <= 1.0 - 1e-6) hi *= 2.0;
  }
  const double lo = lb.lambda1;
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) grid.push_back(lo + (hi - lo) * (i + 1.0) / (n_points + 1.0));
  return grid;
}

/// Evaluates the radial CDF and dCDF/dr on a radius grid.
inline RadialBrownMeasure radial_brown_measure(const KFunction& kf, const std::vector<double>& r_grid) {
  detail::require_not_dirac(kf);
  const MeasureRPlus& base = kf.measure().base();
  const MeasureRPlus mu_sq = pushforward_square(base);
  RadialBrownMeasure out;
  out.lambda1 = kf.bounds().lambda1;
  out.lambda2 = kf.bounds().lambda2;
  out.zero_mass = base.zero_atom();
  out.grid.reserve(r_grid.size());
  for (double r : r_grid) {
    RadialBrownMeasure::Row row;
    row.r = r;
    row.cdf = radial_cdf(kf, r);
    if (detail::classify(kf.bounds(), r) == detail::Annulus::inside) {
      row.density = 2.0 * std::numbers::pi * r * radial_density(mu_sq, kf.bounds(), r);
    }
    out.grid.push_back(row);
  }
  return out;
}

/// Maximum of |int log|lambda - z| dmu_T(z) - log Delta(T - lambda)| over the
/// lambda grid. Rotation invariance reduces the left side to
/// int log max(|lambda|, rho) dF(rho) = log lambda2 - int_{|lambda|}^{lambda2} F(rho)/rho drho,
/// integrated with a cosine-mapped Gauss-Legendre rule on the radial CDF.
inline double log_potential_consistency(const RadialBrownMeasure& rbm, const KFunction& kf,
                                        const std::vector<cplx>& lambda_grid, int n_nodes = 96) {
  if (!rbm.lambda2.is_finite()) {
    fail(ErrorCode::domain_error, "log-potential check needs a bounded Brown measure");
  }
  const double l2 = rbm.lambda2.value();
  double worst = 0.0;
  for (const cplx& lambda : lambda_grid) {
    const double r = std::abs(lambda);
    double potential = 0.0;
    if (r >= l2) {
      potential = std::log(r);
    } else {
      const double lo = std::max(r, rbm.lambda1);
      const quad::Rule rule = quad::cosine_mapped(lo, l2, n_nodes);
      const double tail = quad::integrate([&](double rho) { return radial_cdf(kf, rho) / rho; }, rule);
      potential = std::log(l2) - tail;
    }
    const DeterminantValue det = fk_det(kf, lambda);
    if (!det.log_delta.is_finite()) {
      worst = std::numeric_limits<double>::infinity();
      continue;
    }
    worst = std::max(worst, std::abs(potential - det.log_delta.value()));
  }
  return worst;
}

}  // namespace rdiag
