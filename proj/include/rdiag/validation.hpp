#pragma once

// Cross-route consistency checks and the Monte Carlo validation report.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "rdiag/brown.hpp"
#include "rdiag/error.hpp"
#include "rdiag/matrix_oracle.hpp"
#include "rdiag/measures.hpp"
#include "rdiag/quadrature.hpp"
#include "rdiag/subordination.hpp"

namespace rdiag {

struct CheckResult {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool skipped = false;  // not applicable to this measure
  std::string note;
  bool passed() const { return skipped || max_error <= tolerance; }
};

inline CheckResult make_check(std::string name, double tolerance) {
  CheckResult c;
  c.name = std::move(name);
  c.tolerance = tolerance;
  return c;
}

struct ConsistencyReport {
  std::vector<CheckResult> checks;
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed(); });
  }
};

struct ConsistencyOptions {
  std::map<std::string, double> tolerances = {
      {"cdf_route", 1e-9},        {"log_potential", 1e-6},         {"gradient", 1e-6},
      {"solver_equivalence", 1e-9}, {"quadrature_refinement", 1e-9}, {"density_normalization", 1e-6},
  };
  int cdf_points = 50;
  int lambda_points = 16;
  int solver_r_points = 20;
  int solver_t_points = 20;
  int normalization_nodes = 128;
  // Rebuilds the measure on a rule with twice the nodes; empty for inputs
  // without a quadrature rule.
  std::function<MeasureRPlus()> refined;
};

namespace detail {

inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(n == 1 ? lo : lo * std::pow(hi / lo, i / (n - 1.0)));
  return g;
}

// A radius scale for grids that must reach past the annulus.
inline double outer_scale(const KFunction& kf) {
  const LambdaBounds& lb = kf.bounds();
  if (lb.lambda2.is_finite()) return lb.lambda2.value();
  return annulus_grid(kf, 1).front() * 2.0;
}

// Radii crossing all three regimes, with phases spread around the circle.
inline std::vector<cplx> regime_spanning_lambdas(const KFunction& kf, int n) {
  const LambdaBounds& lb = kf.bounds();
  const double l2 = outer_scale(kf);
  const double lo = lb.lambda1 > 0.0 ? 0.5 * lb.lambda1 : 0.05 * l2;
  const double hi = 1.5 * l2;
  std::vector<cplx> out;
  for (int i = 0; i < n; ++i) {
    const double r = lo + (hi - lo) * i / (n - 1.0);
    out.push_back(std::polar(r, 0.7 * i));
  }
  return out;
}

}  // namespace detail

inline CheckResult check_cdf_route(const KFunction& kf, double tol, int n_points) {
  CheckResult c = make_check("cdf_route", tol);
  const MeasureRPlus mu_sq = pushforward_square(kf.measure().base());
  for (double r : annulus_grid(kf, n_points)) {
    const double a = radial_cdf(kf, r);
    const double b = radial_cdf_via_s_transform(mu_sq, kf.bounds(), r);
    c.max_error = std::max(c.max_error, std::abs(a - b));
  }
  return c;
}

inline CheckResult check_log_potential(const KFunction& kf, double tol, int n_points) {
  CheckResult c = make_check("log_potential", tol);
  if (!kf.bounds().lambda2.is_finite()) {
    c.skipped = true;
    c.note = "infinite second moment";
    return c;
  }
  if (kf.measure().base().zero_atom() > 0.0) {
    c.skipped = true;
    c.note = "log Delta(T) = -inf inside the inner disk";
    return c;
  }
  const RadialBrownMeasure rbm = radial_brown_measure(kf, {});
  c.max_error = log_potential_consistency(rbm, kf, detail::regime_spanning_lambdas(kf, n_points));
  return c;
}

// d/dr log Delta(T - r) = cdf(r) / r inside the annulus, by central differences.
inline CheckResult check_gradient(const KFunction& kf, double tol, int n_points) {
  CheckResult c = make_check("gradient", tol);
  const LambdaBounds& lb = kf.bounds();
  for (double r : annulus_grid(kf, n_points)) {
    const double step = 1e-5 * r;
    if (r - step <= lb.lambda1 || (lb.lambda2.is_finite() && r + step >= lb.lambda2.value())) continue;
    const double up = fk_det(kf, r + step).log_delta.value();
    const double down = fk_det(kf, r - step).log_delta.value();
    const double fd = (up - down) / (2.0 * step);
    c.max_error = std::max(c.max_error, std::abs(fd - radial_cdf(kf, r) / r));
  }
  return c;
}

inline CheckResult check_solver_equivalence(const KFunction& kf, double tol, int nr, int nt) {
  CheckResult c = make_check("solver_equivalence", tol);
  const double scale = detail::outer_scale(kf);
  for (double r : detail::log_grid(0.1 * scale, 1.5 * scale, nr)) {
    for (double t : detail::log_grid(1e-2, 1e2, nt)) {
      const cplx w = fixed_point_omega1(kf.measure(), r, t);
      const double s = solve_s(kf, r, t).s;
      c.max_error = std::max(c.max_error, std::abs(w - cplx(0.0, s)));
    }
  }
  return c;
}

inline CheckResult check_quadrature_refinement(const KFunction& kf, const std::function<MeasureRPlus()>& refined,
                                               double tol, int n_points) {
  CheckResult c = make_check("quadrature_refinement", tol);
  if (!refined) {
    c.skipped = true;
    c.note = "no quadrature rule to refine";
    return c;
  }
  const KFunction fine(refined());
  for (double r : annulus_grid(kf, n_points)) {
    c.max_error = std::max(c.max_error, std::abs(radial_cdf(kf, r) - radial_cdf(fine, r)));
  }
  return c;
}

// int dCDF/dr over the annulus against 1. When lambda1 = 0 the integral
// starts at 1e-3 of the outer radius, since a discretized density has a
// tiny inner radius of its own below which S^-1 is not reachable; the CDF
// there (zero atom included) is added back. For unbounded support the
// integral stops where the CDF passes 1 - 1e-6 and the deficit is added back.
inline CheckResult check_density_normalization(const KFunction& kf, double tol, int n_nodes) {
  CheckResult c = make_check("density_normalization", tol);
  const LambdaBounds& lb = kf.bounds();
  const MeasureRPlus mu_sq = pushforward_square(kf.measure().base());
  double hi = 0.0;
  double tail = 0.0;
  if (lb.lambda2.is_finite()) {
    hi = lb.lambda2.value();
  } else {
    const std::vector<double> g = annulus_grid(kf, 1);
    hi = 2.0 * g.front();
    tail = 1.0 - radial_cdf(kf, hi);
  }
  double lo = lb.lambda1;
  double below = 0.0;
  if (lo == 0.0) {
    lo = 1e-3 * hi;
    below = radial_cdf(kf, lo);
  }
  const quad::Rule rule = quad::cosine_mapped(lo, hi, n_nodes);
  const double mass = quad::integrate(
      [&](double r) { return 2.0 * std::numbers::pi * r * radial_density(mu_sq, lb, r); }, rule);
  c.max_error = std::abs(below + mass + tail - 1.0);
  return c;
}

inline double tolerance_or(const std::map<std::string, double>& tols, const std::string& name) {
  const auto it = tols.find(name);
  if (it == tols.end()) fail(ErrorCode::input_error, "unknown tolerance \"" + name + "\"");
  return it->second;
}

namespace detail {

// A check that raises a library error (e.g. a coarse rule whose own inner
// radius lies above the grid) counts as failed, with the error as its note.
inline CheckResult guarded(const std::string& name, double tol, const std::function<CheckResult()>& run) {
  try {
    return run();
  } catch (const Error& e) {
    CheckResult c = make_check(name, tol);
    c.max_error = std::numeric_limits<double>::infinity();
    c.note = std::string(to_string(e.code())) + ": " + e.what();
    return c;
  }
}

}  // namespace detail

/// Runs every check. A Dirac input fails with ErrorCode::dirac_measure.
inline ConsistencyReport consistency_suite(const MeasureRPlus& mu, const ConsistencyOptions& opt = {}) {
  const KFunction kf(mu);
  detail::require_not_dirac(kf);
  const auto& tols = opt.tolerances;
  const double t_route = tolerance_or(tols, "cdf_route");
  const double t_pot = tolerance_or(tols, "log_potential");
  const double t_grad = tolerance_or(tols, "gradient");
  const double t_solver = tolerance_or(tols, "solver_equivalence");
  const double t_quad = tolerance_or(tols, "quadrature_refinement");
  const double t_norm = tolerance_or(tols, "density_normalization");
  ConsistencyReport rep;
  auto add = [&](const std::string& name, double tol, const std::function<CheckResult()>& run) {
    rep.checks.push_back(detail::guarded(name, tol, run));
  };
  add("cdf_route", t_route, [&] { return check_cdf_route(kf, t_route, opt.cdf_points); });
  add("log_potential", t_pot, [&] { return check_log_potential(kf, t_pot, opt.lambda_points); });
  add("gradient", t_grad, [&] { return check_gradient(kf, t_grad, opt.cdf_points); });
  add("solver_equivalence", t_solver,
      [&] { return check_solver_equivalence(kf, t_solver, opt.solver_r_points, opt.solver_t_points); });
  add("quadrature_refinement", t_quad,
      [&] { return check_quadrature_refinement(kf, opt.refined, t_quad, opt.cdf_points); });
  add("density_normalization", t_norm,
      [&] { return check_density_normalization(kf, t_norm, opt.normalization_nodes); });
  return rep;
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct McConfig {
  int n = 500;
  int n_samples = 1;
  std::uint64_t seed = 1;
  std::vector<cplx> lambda_list;
  std::vector<double> t_list;
  mc::Conjugation conjugation = mc::Conjugation::none;
};

struct McTraceRow {
  cplx lambda;
  double t = 0.0;
  double h_empirical = 0.0;
  double h_analytic = 0.0;
  double log_det_empirical = 0.0;
  double log_det_analytic = 0.0;
  cplx trace_empirical;  // tau((lambda - T)[|lambda - T|^2 + t^2]^-1)
  cplx trace_analytic;
};

struct McEnsembleReport {
  int n = 0;
  int n_samples = 0;
  std::uint64_t seed = 0;
  std::vector<double> eigenvalue_moduli;  // pooled over samples, sorted
  double ks_to_analytic = 0.0;
  std::vector<McTraceRow> resolvent_trace_estimates;

  double empirical_radial_cdf(double r) const {
    const auto it = std::upper_bound(eigenvalue_moduli.begin(), eigenvalue_moduli.end(), r);
    return static_cast<double>(it - eigenvalue_moduli.begin()) / static_cast<double>(eigenvalue_moduli.size());
  }
};

/// Samples T_n per the configuration, pools the eigenvalue moduli, and
/// averages the per-sample resolvent statistics over samples.
inline McEnsembleReport run_mc_validation(const MeasureRPlus& mu, const McConfig& cfg) {
  if (cfg.n < 2) fail(ErrorCode::domain_error, "n must be >= 2");
  if (cfg.n_samples < 1) fail(ErrorCode::domain_error, "n_samples must be >= 1");
  const KFunction kf(mu);
  detail::require_not_dirac(kf);

  McEnsembleReport rep;
  rep.n = cfg.n;
  rep.n_samples = cfg.n_samples;
  rep.seed = cfg.seed;
  for (const cplx& lambda : cfg.lambda_list) {
    detail::require_nonzero(lambda);
    for (double t : cfg.t_list) {
      McTraceRow row;
      row.lambda = lambda;
      row.t = t;
      const SubordinationResult sr = solve_s(kf, std::abs(lambda), t);
      row.h_analytic = kf.h(sr.s);
      row.log_det_analytic = fk_det_regularized(kf, lambda, t).log_delta.value();
      row.trace_analytic = resolvent_traces(kf, lambda, t).first;
      rep.resolvent_trace_estimates.push_back(row);
    }
  }

  const double weight = 1.0 / cfg.n_samples;
  for (int k = 0; k < cfg.n_samples; ++k) {
    mc::Rng rng = mc::make_stream(cfg.seed, static_cast<std::uint64_t>(k));
    const mc::Matrix t_mat = mc::sample_rdiagonal(mu, cfg.n, rng, cfg.conjugation);
    for (const cplx& z : mc::eigenvalues(t_mat)) rep.eigenvalue_moduli.push_back(std::abs(z));
    std::size_t idx = 0;
    for (const cplx& lambda : cfg.lambda_list) {
      const mc::SymmetrizedLaw law = mc::empirical_symmetrized_law(t_mat, lambda, cfg.t_list);
      for (const auto& lr : law.rows) {
        McTraceRow& row = rep.resolvent_trace_estimates[idx++];
        row.h_empirical += weight * lr.h_lambda;
        row.log_det_empirical += weight * lr.log_det;
        row.trace_empirical += weight * mc::empirical_block_traces(t_mat, lambda, lr.t).off;
      }
    }
  }
  std::sort(rep.eigenvalue_moduli.begin(), rep.eigenvalue_moduli.end());

  const double delta = mu.zero_atom();
  const mc::EmpiricalCdf emp(rep.eigenvalue_moduli);
  rep.ks_to_analytic = mc::ks_distance(
      emp, [&](double r) { return r > 0.0 ? radial_cdf(kf, r) : delta; },
      [&](double r) { return r > 0.0 ? radial_cdf(kf, r) : 0.0; });
  return rep;
}

}  // namespace rdiag
