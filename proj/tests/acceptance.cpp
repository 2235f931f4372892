// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "rdiag/brown.hpp"
#include "rdiag/builtins.hpp"
#include "rdiag/matrix_oracle.hpp"
#include "rdiag/subordination.hpp"
#include "rdiag/validation.hpp"

using namespace rdiag;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

struct Named {
  std::string label;
  MeasureRPlus mu;
};

std::vector<Named> route_measures() {
  return {{"quarter_circle", builtin::quarter_circle()},
          {"marchenko_pastur", builtin::marchenko_pastur(1.0)},
          {"two_atoms", builtin::two_atoms()},
          {"uniform(1,2)", builtin::uniform(1.0, 2.0)}};
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Verdict circular_law() {
  const auto t0 = std::chrono::steady_clock::now();
  const KFunction kf(builtin::quarter_circle());
  double worst = 0.0;
  for (int i = 1; i <= 19; ++i) {
    const double r = 0.05 * i;
    worst = std::max(worst, std::abs(radial_cdf(kf, r) - r * r));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-7 && secs < 1.0, "max |F(r) - r^2| = " + sci(worst) + ", " + sci(secs) + " s"};
}

Verdict dual_route() {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  for (const auto& [label, mu] : route_measures()) {
    const KFunction kf(mu);
    const CheckResult c = check_cdf_route(kf, 1e-9, 50);
    v.pass = v.pass && c.passed();
    v.detail += label + " " + sci(c.max_error) + "; ";
  }
  const double secs = seconds_since(t0);
  v.pass = v.pass && secs < 5.0;
  v.detail += sci(secs) + " s";
  return v;
}

Verdict solver_equivalence() {
  Verdict v;
  for (const auto& [label, mu] : route_measures()) {
    const auto t0 = std::chrono::steady_clock::now();
    const KFunction kf(mu);
    const CheckResult c = check_solver_equivalence(kf, 1e-9, 20, 20);
    const double secs = seconds_since(t0);
    v.pass = v.pass && c.passed() && secs < 10.0;
    v.detail += label + " " + sci(c.max_error) + " in " + sci(secs) + " s; ";
  }
  return v;
}

Verdict fk_regimes() {
  Verdict v;
  double worst_pot = 0.0;
  for (const auto& [label, mu] : route_measures()) {
    const KFunction kf(mu);
    const LambdaBounds& lb = kf.bounds();
    const double l2 = lb.lambda2.value();
    for (double f : {1.0, 1.3, 4.0}) {
      for (double phase : {0.0, 1.1, -2.5}) {
        const cplx lambda = std::polar(f * l2, phase);
        v.pass = v.pass && fk_det(kf, lambda).log_delta.value() == std::log(f * l2);
      }
    }
    if (lb.lambda1 > 0.0) {
      const double inside = log_det_of(mu).value();
      for (double f : {0.2, 0.7, 1.0}) {
        v.pass = v.pass && fk_det(kf, std::polar(f * lb.lambda1, 0.4)).log_delta.value() == inside;
      }
    }
    const RadialBrownMeasure rbm = radial_brown_measure(kf, {});
    worst_pot = std::max(worst_pot,
                         log_potential_consistency(rbm, kf, detail::regime_spanning_lambdas(kf, 16)));
  }
  v.pass = v.pass && worst_pot < 1e-6;
  v.detail = "exact outer/inner values, log-potential max error " + sci(worst_pot);
  return v;
}

Verdict boundary_limits() {
  const KFunction kf(builtin::two_atoms());
  const BoundaryDiagnostics inner = boundary_diagnostics(kf, 1.0);
  const BoundaryDiagnostics outer = boundary_diagnostics(kf, 2.0);
  return {inner.deviation < 1e-4 && outer.deviation < 1e-4,
          "r=1: t/s -> " + sci(inner.extrapolated) + " (dev " + sci(inner.deviation) + "), r=2: s t -> " +
              sci(outer.extrapolated) + " (dev " + sci(outer.deviation) + ")"};
}

Verdict negative_moment() {
  const KFunction kf(builtin::two_atoms());
  const double formula = negative_moment_first(kf, cplx(2.0, 0.0)).value();
  const double t = 1e-6;
  const double numeric = kf.h(solve_s(kf, 2.0, t).s) / t;
  return {formula == 2.0 / 3.0 && std::abs(numeric - 2.0 / 3.0) < 1e-4,
          "formula " + sci(formula) + ", h/t at t=1e-6 " + sci(numeric)};
}

Verdict ct_plus_u_radii() {
  Verdict v;
  double worst = 0.0;
  for (double t : {0.25, 0.5, 1.0, 2.0}) {
    // |c_t| has the quarter-circle law of radius 2 sqrt(t); shifting by -1 gives |c_t + 1|
    const KFunction kf(builtin::quarter_circle(2.0 * std::sqrt(t)));
    const LambdaBounds lb = shifted_lambda_bounds(kf, cplx(-1.0, 0.0));
    const double e2 = std::abs(lb.lambda2.value() - std::sqrt(t + 1.0));
    const double e1 = std::abs(lb.lambda1 - std::sqrt(std::max(0.0, 1.0 - t)));
    worst = std::max({worst, e1, e2});
    if (t >= 1.0) v.pass = v.pass && lb.lambda1 == 0.0;
  }
  v.pass = v.pass && worst < 1e-8;
  v.detail = "max radius error " + sci(worst);
  return v;
}

Verdict monte_carlo() {
  Verdict v;
  {
    const auto t0 = std::chrono::steady_clock::now();
    mc::Rng rng = mc::make_stream(1, 0);
    std::vector<double> mods;
    for (const cplx& z : mc::eigenvalues(mc::sample_ginibre(1000, rng))) mods.push_back(std::abs(z));
    const double ks = mc::ks_distance(mc::EmpiricalCdf(mods), [](double r) { return std::min(1.0, r * r); });
    const double secs = seconds_since(t0);
    v.pass = v.pass && ks < 0.05 && secs < 120.0;
    v.detail += "Ginibre KS " + sci(ks) + " in " + sci(secs) + " s; ";
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    McConfig cfg;
    cfg.n = 1000;
    cfg.seed = 1;
    const McEnsembleReport rep = run_mc_validation(builtin::two_atoms(), cfg);
    const double secs = seconds_since(t0);
    v.pass = v.pass && rep.ks_to_analytic < 0.07 && secs < 120.0;
    v.detail += "two-atom KS " + sci(rep.ks_to_analytic) + " in " + sci(secs) + " s";
  }
  return v;
}

Verdict growth_bounds() {
  Verdict v;
  std::vector<double> grid;
  for (int i = 0; i <= 50; ++i) grid.push_back(1e-6 * std::pow(1e10, i / 50.0));
  const std::vector<Named> compact{{"quarter_circle", builtin::quarter_circle()},
                                   {"marchenko_pastur(1)", builtin::marchenko_pastur(1.0)},
                                   {"marchenko_pastur(0.5)", builtin::marchenko_pastur(0.5)},
                                   {"uniform(1,2)", builtin::uniform(1.0, 2.0)},
                                   {"two_atoms", builtin::two_atoms()}};
  for (const auto& [label, mu] : compact) {
    const KFunction kf(mu);
    for (double r : annulus_grid(kf, 3)) {
      const GrowthBounds gb = subordination_growth_bounds(kf, r, grid);
      const bool ok = gb.c1 > 0.0 && gb.c1 <= gb.c2 && std::isfinite(gb.c2) && gb.t_lambda.has_value() &&
                      gb.large_t_bounds_hold;
      v.pass = v.pass && ok;
      if (!ok) v.detail += label + " fails at r=" + sci(r) + "; ";
    }
  }
  if (v.pass) v.detail = "C1, C2 finite and positive, large-t bounds hold above t_lambda, 5 measures x 3 radii";
  return v;
}

Verdict hermitian_reduction() {
  Verdict v;
  double worst = 0.0;
  for (const auto& [label, mu] : route_measures()) {
    const KFunction kf(mu);
    const double l2 = kf.bounds().lambda2.value();
    for (double f : {0.1, 0.5, 0.9, 1.2, 2.0}) {
      for (double eps : {1e-4, 1e-2, 1.0}) {
        const HermitianReductionEntries e = hermitian_reduction_entries(kf, std::polar(f * l2, 0.3), eps);
        v.pass = v.pass && e.delta > 0.0;
        worst = std::max(worst, std::abs(e.diag_lhs - e.diag_rhs));
      }
    }
  }
  v.pass = v.pass && worst < 1e-9;
  const KFunction kf(builtin::two_atoms());
  mc::Rng rng = mc::make_stream(3, 0);
  const mc::Matrix t = mc::sample_rdiagonal(builtin::two_atoms(), 1000, rng, mc::Conjugation::none);
  double mc_worst = 0.0;
  for (double r : {0.8, 1.4, 2.0}) {
    const cplx lambda = std::polar(r, 0.5);
    const mc::BlockTraces bt = mc::empirical_block_traces(t, lambda, 0.2);
    const HermitianReductionEntries e = hermitian_reduction_entries(kf, lambda, 0.2);
    mc_worst = std::max({mc_worst, std::abs(bt.diag - e.diag_rhs), std::abs(bt.off - e.off_rhs),
                         std::abs(bt.off_conj - e.off_conj_rhs)});
  }
  v.pass = v.pass && mc_worst < 5e-2;
  v.detail = "delta > 0, (1,1)-entry error " + sci(worst) + ", block MC error " + sci(mc_worst);
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"circular-law reproduction", circular_law},
      {"dual-route Brown CDF", dual_route},
      {"solver equivalence", solver_equivalence},
      {"FK determinant regimes", fk_regimes},
      {"boundary limits", boundary_limits},
      {"negative first moment", negative_moment},
      {"c_t + u radii", ct_plus_u_radii},
      {"Monte Carlo single ring", monte_carlo},
      {"subordination growth bounds", growth_bounds},
      {"Hermitian-reduction entries", hermitian_reduction},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("%s %2zu %s: %s [%.2f s]\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
