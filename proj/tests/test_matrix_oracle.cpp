#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rdiag/brown.hpp"
#include "rdiag/builtins.hpp"
#include "rdiag/matrix_oracle.hpp"

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

std::vector<double> moduli(const std::vector<cplx>& zs) {
  std::vector<double> out;
  for (const cplx& z : zs) out.push_back(std::abs(z));
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST(Haar, Unitary) {
  mc::Rng rng = mc::make_stream(3, 0);
  const mc::Matrix u = mc::sample_haar_unitary(150, rng);
  EXPECT_LT((u.adjoint() * u - mc::Matrix::Identity(150, 150)).norm(), 1e-12);
  for (const cplx& z : mc::eigenvalues(u)) EXPECT_NEAR(std::abs(z), 1.0, 1e-8);
}

TEST(Haar, TraceMoments) {
  // E|tr U^k|^2 = min(k, n) for Haar U
  const int n = 12;
  const int samples = 2000;
  double m1 = 0.0;
  double m2 = 0.0;
  cplx mean1 = 0.0;
  for (int i = 0; i < samples; ++i) {
    mc::Rng rng = mc::make_stream(5, static_cast<std::uint64_t>(i));
    const mc::Matrix u = mc::sample_haar_unitary(n, rng);
    const cplx t1 = u.trace();
    const cplx t2 = (u * u).trace();
    m1 += std::norm(t1) / samples;
    m2 += std::norm(t2) / samples;
    mean1 += t1 / static_cast<double>(samples);
  }
  // sd of |tr U|^2 is about 1, of |tr U^2|^2 about 2
  EXPECT_NEAR(m1, 1.0, 0.1);
  EXPECT_NEAR(m2, 2.0, 0.2);
  EXPECT_LT(std::abs(mean1), 0.1);
}

TEST(Haar, EigenanglesUniform) {
  // without the phase fix the angles pile up; with it they are uniform
  std::vector<double> angles;
  for (int i = 0; i < 4; ++i) {
    mc::Rng rng = mc::make_stream(9, static_cast<std::uint64_t>(i));
    for (const cplx& z : mc::eigenvalues(mc::sample_haar_unitary(100, rng))) angles.push_back(std::arg(z));
  }
  const double ks = mc::ks_distance(mc::EmpiricalCdf(angles),
                                    [](double a) { return (a + std::numbers::pi) / (2.0 * std::numbers::pi); });
  EXPECT_LT(ks, 0.03);
}

TEST(Ginibre, CircularLaw) {
  mc::Rng rng = mc::make_stream(1, 0);
  const auto mods = moduli(mc::eigenvalues(mc::sample_ginibre(400, rng)));
  const double ks = mc::ks_distance(mc::EmpiricalCdf(mods), [](double r) { return std::min(1.0, r * r); });
  EXPECT_LT(ks, 0.05);
}

TEST(Eigenvalues, DiagonalMatrix) {
  mc::Matrix d = mc::Matrix::Zero(5, 5);
  std::vector<cplx> want{{1.0, 0.0}, {-2.0, 1.0}, {0.0, 3.0}, {0.5, -0.5}, {4.0, 0.0}};
  for (int i = 0; i < 5; ++i) d(i, i) = want[static_cast<std::size_t>(i)];
  const auto got = mc::eigenvalues(d);
  for (const cplx& w : want) {
    const bool found = std::any_of(got.begin(), got.end(), [&](const cplx& z) { return std::abs(z - w) < 1e-14; });
    EXPECT_TRUE(found) << w;
  }
  expect_code(ErrorCode::domain_error, [] { mc::eigenvalues(mc::Matrix::Zero(2, 3)); });
}

TEST(QuantileSpectrum, Atoms) {
  const auto d = mc::quantile_spectrum(builtin::two_atoms(), 9);
  // left-continuous quantile: p = 1/2 still maps to the lower atom
  EXPECT_EQ(std::count(d.begin(), d.end(), 1.0), 5);
  EXPECT_EQ(std::count(d.begin(), d.end(), 2.0), 4);
  const auto u = mc::quantile_spectrum(builtin::uniform(1.0, 2.0), 3);
  EXPECT_NEAR(u[1], 1.5, 1e-3);
}

TEST(SampleRDiagonal, SingularValuesAreTheDiagonal) {
  const MeasureRPlus mu = builtin::uniform(1.0, 2.0);
  for (auto conj : {mc::Conjugation::none, mc::Conjugation::haar}) {
    mc::Rng rng = mc::make_stream(2, 0);
    const mc::Matrix t = mc::sample_rdiagonal(mu, 60, rng, conj);
    auto sv = mc::singular_values_shifted(t, 0.0);
    auto q = mc::quantile_spectrum(mu, 60);
    std::sort(q.begin(), q.end());
    for (std::size_t i = 0; i < sv.size(); ++i) EXPECT_NEAR(sv[i], q[i], 1e-10);
  }
  mc::Rng rng = mc::make_stream(2, 0);
  expect_code(ErrorCode::domain_error, [&] { mc::sample_rdiagonal(mu, 1, rng); });
}

TEST(SampleRDiagonal, ConjugationPreservesSpectrumInLaw) {
  // same U-stream, so Conjugation::haar is a unitary conjugate of Conjugation::none
  const MeasureRPlus mu = builtin::two_atoms();
  mc::Rng a = mc::make_stream(4, 0);
  mc::Rng b = mc::make_stream(4, 0);
  auto ea = moduli(mc::eigenvalues(mc::sample_rdiagonal(mu, 80, a, mc::Conjugation::none)));
  auto eb = moduli(mc::eigenvalues(mc::sample_rdiagonal(mu, 80, b, mc::Conjugation::haar)));
  std::sort(ea.begin(), ea.end());
  std::sort(eb.begin(), eb.end());
  for (std::size_t i = 0; i < ea.size(); ++i) EXPECT_NEAR(ea[i], eb[i], 1e-10);
}

TEST(Determinism, SameStreamSameMatrix) {
  mc::Rng a = mc::make_stream(42, 7);
  mc::Rng b = mc::make_stream(42, 7);
  mc::Rng c = mc::make_stream(42, 8);
  const mc::Matrix ta = mc::sample_rdiagonal(builtin::two_atoms(), 30, a);
  const mc::Matrix tb = mc::sample_rdiagonal(builtin::two_atoms(), 30, b);
  const mc::Matrix tc = mc::sample_rdiagonal(builtin::two_atoms(), 30, c);
  EXPECT_TRUE(ta == tb);
  EXPECT_FALSE(ta == tc);
}

TEST(KsDistance, Examples) {
  const mc::EmpiricalCdf e({0.5});
  auto step = [](double x) { return x >= 0.5 ? 1.0 : 0.0; };
  auto step_left = [](double x) { return x > 0.5 ? 1.0 : 0.0; };
  EXPECT_EQ(mc::ks_distance(e, step, step_left), 0.0);
  // its own quantiles
  const int n = 200;
  std::vector<double> q;
  for (int i = 1; i <= n; ++i) q.push_back((i - 0.5) / n);
  EXPECT_LE(mc::ks_distance(mc::EmpiricalCdf(q), [](double x) { return x; }), 1.0 / n);
  // a step moved by 0.1 of its mass
  const mc::EmpiricalCdf two({0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0});
  auto cdf = [](double x) { return x >= 1.0 ? 1.0 : (x >= 0.0 ? 0.8 : 0.0); };
  auto cdf_left = [](double x) { return x > 1.0 ? 1.0 : (x > 0.0 ? 0.8 : 0.0); };
  EXPECT_NEAR(mc::ks_distance(two, cdf, cdf_left), 0.1, 1e-15);
  expect_code(ErrorCode::domain_error, [] { mc::ks_distance(mc::EmpiricalCdf({}), [](double) { return 0.0; }); });
}

TEST(KsTwoSample, Examples) {
  const mc::EmpiricalCdf a({1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(mc::ks_two_sample(a, a), 0.0);
  EXPECT_EQ(mc::ks_two_sample(a, mc::EmpiricalCdf({5.0, 6.0})), 1.0);
  EXPECT_DOUBLE_EQ(mc::ks_two_sample(a, mc::EmpiricalCdf({1.0, 2.0, 3.0, 9.0})), 0.25);
}

TEST(SymmetrizedLaw, ZeroShiftMatchesH) {
  const MeasureRPlus mu = builtin::uniform(1.0, 2.0);
  const SymmetricMeasure sym = symmetrize(mu);
  mc::Rng rng = mc::make_stream(1, 0);
  const mc::Matrix t = mc::sample_rdiagonal(mu, 200, rng, mc::Conjugation::none);
  const auto law = mc::empirical_symmetrized_law(t, 0.0, {0.1, 1.0, 10.0});
  // |T| carries the quantile spectrum: only the discretization error remains
  for (const auto& row : law.rows) EXPECT_NEAR(row.h_lambda, h_eval(sym, row.t), 2e-3);
  expect_code(ErrorCode::domain_error, [&] { mc::empirical_symmetrized_law(t, 0.0, {0.0}); });
}

TEST(SymmetrizedLaw, RotationInvariantInDistribution) {
  const MeasureRPlus mu = builtin::two_atoms();
  auto sv_at = [&](cplx lambda, std::uint64_t idx) {
    mc::Rng rng = mc::make_stream(6, idx);
    return mc::singular_values_shifted(mc::sample_rdiagonal(mu, 200, rng, mc::Conjugation::none), lambda);
  };
  const cplx lambda(1.2, 0.0);
  const double baseline = mc::ks_two_sample(mc::EmpiricalCdf(sv_at(lambda, 0)), mc::EmpiricalCdf(sv_at(lambda, 1)));
  const double rotated = mc::ks_two_sample(mc::EmpiricalCdf(sv_at(lambda, 0)),
                                           mc::EmpiricalCdf(sv_at(lambda * std::polar(1.0, 2.0), 2)));
  EXPECT_LT(rotated, 2.0 * std::max(baseline, 1.0 / 200));
}

TEST(BlockTraces, MatchDirectInverse) {
  mc::Rng rng = mc::make_stream(8, 0);
  const mc::Matrix t = mc::sample_rdiagonal(builtin::two_atoms(), 25, rng);
  const cplx lambda(0.7, -0.4);
  const double eps = 0.3;
  const mc::Matrix a = lambda * mc::Matrix::Identity(25, 25) - t;
  const mc::Matrix id = mc::Matrix::Identity(25, 25);
  const mc::Matrix r1 = (a * a.adjoint() + eps * eps * id).inverse();
  const mc::Matrix r2 = (a.adjoint() * a + eps * eps * id).inverse();
  const mc::BlockTraces bt = mc::empirical_block_traces(t, lambda, eps);
  EXPECT_NEAR(bt.diag, eps * r1.trace().real() / 25.0, 1e-12);
  EXPECT_LT(std::abs(bt.off - (a * r2).trace() / 25.0), 1e-12);
  EXPECT_LT(std::abs(bt.off_conj - (a.adjoint() * r1).trace() / 25.0), 1e-12);
}

// Larger ensembles; labelled slow in ctest. Tolerances are c / sqrt(n * samples).

TEST(Slow, HLambdaTwoAtoms) {
  // lambda = sqrt(2), t = 1; pooled n * samples = 8000, c = 1
  const MeasureRPlus mu = builtin::two_atoms();
  const KFunction kf(mu);
  const int n = 2000;
  const int samples = 4;
  const cplx lambda(std::sqrt(2.0), 0.0);
  double h_emp = 0.0;
  for (int k = 0; k < samples; ++k) {
    mc::Rng rng = mc::make_stream(1, static_cast<std::uint64_t>(k));
    const auto law = mc::empirical_symmetrized_law(mc::sample_rdiagonal(mu, n, rng, mc::Conjugation::none), lambda, {1.0});
    h_emp += law.rows[0].h_lambda / samples;
  }
  const double h_an = kf.h(solve_s(kf, std::sqrt(2.0), 1.0).s);
  const double tol = 1.0 / std::sqrt(static_cast<double>(n) * samples);
  EXPECT_LT(std::abs(h_emp - h_an), std::min(tol, 2e-2)) << h_emp << " vs " << h_an;
}

TEST(Slow, BlockTracesTwoAtoms) {
  // c = 1.5 at n = 1000
  const MeasureRPlus mu = builtin::two_atoms();
  const KFunction kf(mu);
  mc::Rng rng = mc::make_stream(2, 0);
  const mc::Matrix t = mc::sample_rdiagonal(mu, 1000, rng, mc::Conjugation::none);
  const double tol = 1.5 / std::sqrt(1000.0);
  for (double r : {0.8, 1.4, 2.0}) {
    const cplx lambda = std::polar(r, 0.5);
    const double eps = 0.2;
    const mc::BlockTraces bt = mc::empirical_block_traces(t, lambda, eps);
    const HermitianReductionEntries e = hermitian_reduction_entries(kf, lambda, eps);
    EXPECT_NEAR(bt.diag, e.diag_rhs, tol) << r;
    EXPECT_LT(std::abs(bt.off - e.off_rhs), tol) << r;
    EXPECT_LT(std::abs(bt.off_conj - e.off_conj_rhs), tol) << r;
  }
}

TEST(Slow, KsDecreasesWithN) {
  std::vector<double> medians;
  for (int n : {250, 500, 1000}) {
    std::vector<double> ks;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      mc::Rng rng = mc::make_stream(seed, 0);
      const auto mods = moduli(mc::eigenvalues(mc::sample_ginibre(n, rng)));
      ks.push_back(mc::ks_distance(mc::EmpiricalCdf(mods), [](double r) { return std::min(1.0, r * r); }));
    }
    medians.push_back(median(ks));
  }
  EXPECT_GT(medians[0], medians[1]);
  EXPECT_GT(medians[1], medians[2]);
}
