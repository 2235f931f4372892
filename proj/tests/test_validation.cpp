#include <gtest/gtest.h>

#include <cmath>

#include "rdiag/builtins.hpp"
#include "rdiag/validation.hpp"

using namespace rdiag;

namespace {

void expect_code(ErrorCode code, const std::function<void()>& f) {
  try {
    f();
    ADD_FAILURE() << "expected error " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

const CheckResult& find(const ConsistencyReport& rep, const std::string& name) {
  for (const auto& c : rep.checks) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("no check named " + name);
}

}  // namespace

TEST(Consistency, TwoAtomsPasses) {
  const ConsistencyReport rep = consistency_suite(builtin::two_atoms());
  EXPECT_TRUE(rep.passed());
  ASSERT_EQ(rep.checks.size(), 6u);
  for (const auto& c : rep.checks) {
    EXPECT_TRUE(c.passed()) << c.name << " " << c.max_error;
  }
  EXPECT_TRUE(find(rep, "quadrature_refinement").skipped);
  EXPECT_FALSE(find(rep, "log_potential").skipped);
  EXPECT_FALSE(find(rep, "solver_equivalence").skipped);
}

TEST(Consistency, DensityBuiltinsPass) {
  struct Case {
    MeasureRPlus mu;
    std::function<MeasureRPlus()> refined;
  };
  const std::vector<Case> cases{
      {builtin::quarter_circle(), [] { return builtin::quarter_circle(2.0, 2 * builtin::default_nodes); }},
      {builtin::marchenko_pastur(0.5), [] { return builtin::marchenko_pastur(0.5, 2 * builtin::default_nodes); }},
      {builtin::uniform(1.0, 2.0), [] { return builtin::uniform(1.0, 2.0, 2 * builtin::default_nodes); }},
  };
  for (const auto& c : cases) {
    ConsistencyOptions opt;
    opt.refined = c.refined;
    const ConsistencyReport rep = consistency_suite(c.mu, opt);
    for (const auto& chk : rep.checks) EXPECT_TRUE(chk.passed()) << chk.name << " " << chk.max_error;
  }
}

TEST(Consistency, DiracIsStructuredFailure) {
  expect_code(ErrorCode::dirac_measure, [] { consistency_suite(make_atomic({{1.0, 1.0}})); });
}

TEST(Consistency, CoarseQuarterCircleNamesQuadratureCheck) {
  ConsistencyOptions opt;
  opt.refined = [] { return builtin::quarter_circle(2.0, 16); };
  const ConsistencyReport rep = consistency_suite(builtin::quarter_circle(2.0, 8), opt);
  EXPECT_FALSE(rep.passed());
  const CheckResult& q = find(rep, "quadrature_refinement");
  EXPECT_FALSE(q.passed());
  EXPECT_GT(q.max_error, 1e-9);
  // checks that cannot even be evaluated below the coarse rule's inner radius say why
  for (const auto& c : rep.checks) {
    if (std::isinf(c.max_error)) {
      EXPECT_NE(c.note.find("out_of_range"), std::string::npos) << c.name;
    }
  }
  EXPECT_TRUE(find(rep, "solver_equivalence").passed());
}

TEST(Consistency, ZeroAtomSkipsLogPotential) {
  const ConsistencyReport rep = consistency_suite(builtin::marchenko_pastur(2.0));
  EXPECT_TRUE(find(rep, "log_potential").skipped);
  EXPECT_TRUE(rep.passed());
}

TEST(Consistency, UnboundedSupport) {
  const MeasureRPlus mu =
      make_density([](double x) { return std::exp(-x); }, 0.0, std::numeric_limits<double>::infinity(), 256);
  const ConsistencyReport rep = consistency_suite(mu);
  // the support is unbounded but lambda2 = sqrt(2) is finite, so every check applies
  EXPECT_FALSE(find(rep, "log_potential").skipped);
  for (const auto& chk : rep.checks) EXPECT_TRUE(chk.passed()) << chk.name << " " << chk.max_error;
}

TEST(Consistency, UnknownToleranceName) {
  ConsistencyOptions opt;
  opt.tolerances.erase("gradient");
  expect_code(ErrorCode::input_error, [&] { consistency_suite(builtin::two_atoms(), opt); });
}

TEST(Consistency, TightToleranceFails) {
  ConsistencyOptions opt;
  opt.tolerances["gradient"] = 0.0;
  const ConsistencyReport rep = consistency_suite(builtin::uniform(1.0, 2.0), opt);
  EXPECT_FALSE(find(rep, "gradient").passed());
  EXPECT_FALSE(rep.passed());
}

TEST(MonteCarlo, DeterministicForSameConfig) {
  McConfig cfg;
  cfg.n = 60;
  cfg.n_samples = 2;
  cfg.seed = 17;
  cfg.lambda_list = {cplx(1.2, 0.3)};
  cfg.t_list = {0.5, 1.0};
  const McEnsembleReport a = run_mc_validation(builtin::two_atoms(), cfg);
  const McEnsembleReport b = run_mc_validation(builtin::two_atoms(), cfg);
  EXPECT_EQ(a.eigenvalue_moduli, b.eigenvalue_moduli);
  EXPECT_EQ(a.ks_to_analytic, b.ks_to_analytic);
  ASSERT_EQ(a.resolvent_trace_estimates.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(a.resolvent_trace_estimates[i].h_empirical, b.resolvent_trace_estimates[i].h_empirical);
    EXPECT_EQ(a.resolvent_trace_estimates[i].trace_empirical, b.resolvent_trace_estimates[i].trace_empirical);
  }
  EXPECT_EQ(a.eigenvalue_moduli.size(), 120u);
  cfg.seed = 18;
  EXPECT_NE(run_mc_validation(builtin::two_atoms(), cfg).eigenvalue_moduli, a.eigenvalue_moduli);
}

TEST(MonteCarlo, SmallEnsembleIsClose) {
  McConfig cfg;
  cfg.n = 300;
  cfg.lambda_list = {cplx(0.0, 1.5)};
  cfg.t_list = {1.0};
  const McEnsembleReport rep = run_mc_validation(builtin::two_atoms(), cfg);
  EXPECT_LT(rep.ks_to_analytic, 0.12);
  const McTraceRow& row = rep.resolvent_trace_estimates.front();
  EXPECT_NEAR(row.h_empirical, row.h_analytic, 3.0 / std::sqrt(300.0));
  EXPECT_NEAR(row.log_det_empirical, row.log_det_analytic, 3.0 / std::sqrt(300.0));
  EXPECT_LT(std::abs(row.trace_empirical - row.trace_analytic), 3.0 / std::sqrt(300.0));
  EXPECT_EQ(rep.empirical_radial_cdf(10.0), 1.0);
  EXPECT_EQ(rep.empirical_radial_cdf(0.5), 0.0);
}

TEST(MonteCarlo, ZeroAtomCountsAtOrigin) {
  // half of H vanishes, so half of the eigenvalues sit at 0 and the CDF jumps there
  McConfig cfg;
  cfg.n = 200;
  const McEnsembleReport rep = run_mc_validation(make_atomic({{0.0, 0.5}, {1.0, 0.25}, {2.0, 0.25}}), cfg);
  EXPECT_GE(rep.empirical_radial_cdf(1e-6), 0.49);
  EXPECT_LT(rep.ks_to_analytic, 0.12);
}

TEST(MonteCarlo, Errors) {
  McConfig cfg;
  cfg.n = 1;
  expect_code(ErrorCode::domain_error, [&] { run_mc_validation(builtin::two_atoms(), cfg); });
  cfg.n = 10;
  cfg.n_samples = 0;
  expect_code(ErrorCode::domain_error, [&] { run_mc_validation(builtin::two_atoms(), cfg); });
  cfg.n_samples = 1;
  expect_code(ErrorCode::dirac_measure, [&] { run_mc_validation(make_atomic({{1.0, 1.0}}), cfg); });
}

TEST(Slow, McTwoAtomsAtThousand) {
  // c = 2 on KS and c = 1.5 on the resolvent statistics, n = 1000, one sample
  McConfig cfg;
  cfg.n = 1000;
  cfg.lambda_list = {cplx(std::sqrt(2.0), 0.0), cplx(0.0, 2.0)};
  cfg.t_list = {0.2, 1.0};
  const McEnsembleReport rep = run_mc_validation(builtin::two_atoms(), cfg);
  EXPECT_LT(rep.ks_to_analytic, std::min(0.07, 2.0 / std::sqrt(1000.0)));
  const double tol = 1.5 / std::sqrt(1000.0);
  for (const auto& row : rep.resolvent_trace_estimates) {
    EXPECT_NEAR(row.h_empirical, row.h_analytic, tol);
    EXPECT_NEAR(row.log_det_empirical, row.log_det_analytic, tol);
    EXPECT_LT(std::abs(row.trace_empirical - row.trace_analytic), tol);
  }
}
