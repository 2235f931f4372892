#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "rdiag/error.hpp"
#include "rdiag/extended.hpp"
#include "rdiag/measures.hpp"
#include "rdiag/roots.hpp"

namespace rdiag {

using cplx = std::complex<double>;

/// h(s) = int s / (s^2 + u^2) dmu(u) together with the pieces the solvers
/// need, all accumulated in one pass:
///   one_minus_sh = 1 - s h(s) = int u^2 / (s^2 + u^2), free of cancellation
///   dh, d_one_minus_sh: derivatives in s
struct HValues {
  double h = 0.0;
  double one_minus_sh = 0.0;
  double dh = 0.0;
  double d_one_minus_sh = 0.0;
};

inline HValues h_values(const SymmetricMeasure& mu, double s) {
  const MeasureRPlus& base = mu.base();
  const auto x = base.positions();
  const auto w = base.weights();
  const double s2 = s * s;
  HValues out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u2 = x[i] * x[i];
    const double den = s2 + u2;
    const double wd = w[i] / den;
    out.h += wd * s;
    out.one_minus_sh += wd * u2;
    const double wdd = wd / den;
    out.dh += wdd * (u2 - s2);
    out.d_one_minus_sh -= 2.0 * s * u2 * wdd;
  }
  const double delta = base.zero_atom();
  if (delta > 0.0) {
    out.h += delta / s;
    out.dh -= delta / s2;
  }
  return out;
}

inline double h_eval(const SymmetricMeasure& mu, double s) {
  if (!(s > 0.0)) fail(ErrorCode::domain_error, "h_eval requires s > 0");
  return h_values(mu, s).h;
}

// G(z) = int 1/(z - u) dmu~(u) for complex z off the real line.
inline cplx cauchy_transform(const SymmetricMeasure& mu, cplx z) {
  const MeasureRPlus& base = mu.base();
  const auto x = base.positions();
  const auto w = base.weights();
  const cplx z2 = z * z;
  cplx sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += w[i] / (z2 - x[i] * x[i]);
  sum *= z;
  if (base.zero_atom() > 0.0) sum += base.zero_atom() / z;
  return sum;
}

// F(z) - z = (1 - z G(z)) / G(z) with 1 - z G(z) = -int u^2/(z^2 - u^2) dmu
// accumulated directly; subtracting z from 1/G loses everything once |z| is
// large.
inline cplx reciprocal_cauchy_minus_z(const SymmetricMeasure& mu, cplx z) {
  const MeasureRPlus& base = mu.base();
  const auto x = base.positions();
  const auto w = base.weights();
  const cplx z2 = z * z;
  cplx g = 0.0;
  cplx defect = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u2 = x[i] * x[i];
    const cplx q = w[i] / (z2 - u2);
    g += q;
    defect -= q * u2;
  }
  g *= z;
  if (base.zero_atom() > 0.0) g += base.zero_atom() / z;
  return defect / g;
}

// G(it) = -i h(t): purely imaginary by symmetry.
inline cplx cauchy_on_imaginary_axis(const SymmetricMeasure& mu, double t) {
  if (!(t > 0.0)) fail(ErrorCode::domain_error, "cauchy_on_imaginary_axis requires t > 0");
  return {0.0, -h_values(mu, t).h};
}

// psi(z) = int z u / (1 - z u) dmu(u), negative half-line branch only.
inline double psi_eval(const MeasureRPlus& mu_sq, double z) {
  if (!(z < 0.0)) fail(ErrorCode::domain_error, "psi_eval requires z < 0");
  return mu_sq.integrate_positive([z](double u) { return z * u / (1.0 - z * u); });
}

inline double psi_derivative(const MeasureRPlus& mu_sq, double z) {
  if (!(z < 0.0)) fail(ErrorCode::domain_error, "psi_derivative requires z < 0");
  return mu_sq.integrate_positive([z](double u) {
    const double d = 1.0 - z * u;
    return u / (d * d);
  });
}

/// Domain and range of the S-transform of a measure on [0, inf):
/// S maps (delta - 1, 0) decreasingly onto (1/b, 1/a) with
/// a = (int u^-1)^-1 and b = int u.
struct STransformWindow {
  double delta = 0.0;
  double range_lo = 0.0;              // 1/b (0 when b = inf)
  Extended range_hi = 0.0;            // 1/a, +inf when int u^-1 diverges
};

inline STransformWindow s_transform_window(const MeasureRPlus& mu_sq) {
  STransformWindow win;
  win.delta = mu_sq.zero_atom();
  const Extended b = mu_sq.moment(1.0);
  win.range_lo = b.is_finite() ? 1.0 / b.value() : 0.0;
  const Extended inv_a = mu_sq.moment(-1.0);
  win.range_hi = inv_a.is_finite() ? Extended(inv_a.value()) : Extended::pos_infinity();
  return win;
}

namespace detail {

constexpr double inversion_tol = 1e-12;
constexpr int inversion_max_iter = 200;

// The v = -z > 0 parametrization of psi, decreasing in v.
inline std::pair<double, double> psi_of_v(const MeasureRPlus& mu_sq, double v) {
  double value = 0.0;
  double deriv = 0.0;
  const auto x = mu_sq.positions();
  const auto w = mu_sq.weights();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = 1.0 + v * x[i];
    value -= w[i] * v * x[i] / d;
    deriv -= w[i] * x[i] / (d * d);
  }
  return {value, deriv};
}

// Phi(v) = S(psi(-v)) = A(v) / B(v), increasing in v, with
//   A = delta + int 1/(1 + v u),  B = int u/(1 + v u).
// Note A = 1 + psi(-v) and psi(-v) = -v B.
struct PhiValues {
  double a = 0.0, b = 0.0, da = 0.0, db = 0.0;
  double phi() const { return a / b; }
  double dphi() const { return (da * b - a * db) / (b * b); }
};

inline PhiValues phi_values(const MeasureRPlus& mu_sq, double v) {
  PhiValues p;
  const auto x = mu_sq.positions();
  const auto w = mu_sq.weights();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = 1.0 + v * x[i];
    const double wd = w[i] / d;
    p.a += wd;
    p.b += wd * x[i];
    p.da -= wd * x[i] / d;
    p.db -= wd * x[i] * x[i] / d;
  }
  p.a += mu_sq.zero_atom();
  return p;
}

}  // namespace detail

/// chi = psi^{-1} on (delta - 1, 0): the unique z < 0 with psi(z) = w.
inline double chi_eval(const MeasureRPlus& mu_sq, double w) {
  const double delta = mu_sq.zero_atom();
  if (!(w > delta - 1.0 && w < 0.0)) {
    fail(ErrorCode::out_of_window, "w = " + std::to_string(w) + " outside (delta - 1, 0)");
  }
  // Bracket z in [-1, -1e-12], pushing the left end out by doubling. Near
  // w = delta - 1 the root is found on A(v) = 1 + psi(-v), which keeps the
  // small quantity 1 + w to full relative precision.
  const bool near_bottom = w < -0.5;
  const double target = near_bottom ? 1.0 + w : w;
  auto f = [&](double v) {
    if (!near_bottom) return detail::psi_of_v(mu_sq, v);
    const auto p = detail::phi_values(mu_sq, v);
    return std::pair<double, double>{p.a, p.da};
  };
  double v_lo = 1e-12;
  double v_hi = 1.0;
  while (f(v_lo).first < target) {
    v_lo *= 1e-3;
    if (v_lo < 1e-300) fail(ErrorCode::out_of_window, "w too close to 0 to invert psi");
  }
  while (f(v_hi).first > target) {
    v_hi *= 2.0;
    if (v_hi > 1e300) fail(ErrorCode::out_of_window, "w too close to delta - 1 to invert psi");
  }
  roots::Options opt;
  opt.f_tol = detail::inversion_tol * std::min(1.0, std::abs(target));
  opt.max_iter = detail::inversion_max_iter;
  const auto root = roots::solve_monotone(f, target, v_lo, v_hi, opt);
  return -root.x;
}

/// S(w) = ((w + 1) / w) chi(w) on the open window (delta - 1, 0).
inline double s_transform(const MeasureRPlus& mu_sq, double w) {
  const double z = chi_eval(mu_sq, w);
  return (w + 1.0) / w * z;
}

/// Result of inverting S at y, with the psi-parameter it was found at and the
/// derivative dw/dy obtained by implicit differentiation.
struct SInverse {
  double w = 0.0;
  double z = 0.0;
  double dw_dy = 0.0;
  double one_plus_w = 0.0;  // accumulated directly, no cancellation near w = -1
};


inline SInverse s_transform_inverse_full(const MeasureRPlus& mu_sq, double y) {
  const STransformWindow win = s_transform_window(mu_sq);
  const bool below_hi = win.range_hi.is_pos_inf() || y < win.range_hi.value();
  if (!(y > win.range_lo) || !below_hi) {
    fail(ErrorCode::out_of_range, "y = " + std::to_string(y) + " outside the range of S");
  }
  auto phi = [&](double v) {
    const auto p = detail::phi_values(mu_sq, v);
    return std::pair<double, double>{p.phi(), p.dphi()};
  };
  double v_lo = 1.0;
  double v_hi = 1.0;
  while (phi(v_lo).first >= y) {
    v_lo *= 0.25;
    if (v_lo < 1e-300) fail(ErrorCode::out_of_range, "y numerically at the lower end of the S range");
  }
  while (phi(v_hi).first <= y) {
    v_hi *= 4.0;
    if (v_hi > 1e300) fail(ErrorCode::out_of_range, "y numerically at the upper end of the S range");
  }
  roots::Options opt;
  opt.f_tol = detail::inversion_tol * std::max(1.0, y);
  opt.max_iter = detail::inversion_max_iter;
  const auto root = roots::solve_monotone(phi, y, v_lo, v_hi, opt);
  const double v = root.x;
  const auto p = detail::phi_values(mu_sq, v);
  SInverse out;
  out.z = -v;
  out.w = -v * p.b;
  out.one_plus_w = p.a;
  // w(v) = -v B(v)  =>  dw/dy = (dw/dv) / (dPhi/dv)
  out.dw_dy = (-p.b - v * p.db) / p.dphi();
  return out;
}

/// The unique w in (delta - 1, 0) with S(w) = y, for y in (1/b, 1/a).
inline double s_transform_inverse(const MeasureRPlus& mu_sq, double y) {
  return s_transform_inverse_full(mu_sq, y).w;
}

}  // namespace rdiag
