#pragma once

// Finite-dimensional Monte Carlo oracle for the analytic modules: samples
// T_n = U_n H_n with U_n Haar and H_n carrying the quantiles of mu_|T|, and
// measures eigenvalue moduli, singular values of T_n - lambda and block
// resolvent traces.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rdiag/error.hpp"
#include "rdiag/measures.hpp"

namespace rdiag::mc {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Rng = std::mt19937_64;

// Independent stream per (seed, sample index).
inline Rng make_stream(std::uint64_t seed, std::uint64_t sample_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(sample_index), static_cast<std::uint32_t>(sample_index >> 32)};
  return Rng(seq);
}

// i.i.d. complex Gaussian entries with E|z|^2 = variance.
inline Matrix gaussian_matrix(int n, Rng& rng, double variance = 1.0) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * variance));
  Matrix z(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i, j) = cplx(re, im);
    }
  }
  return z;
}

/// Haar unitary: Q of the QR factorization of a complex Ginibre matrix,
/// columns rephased by R_ii / |R_ii| so that the factorization is unique.
inline Matrix sample_haar_unitary(int n, Rng& rng) {
  const Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(n, rng));
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    const cplx d = r(j, j);
    const double mod = std::abs(d);
    if (mod > 0.0) q.col(j) *= d / mod;
  }
  return q;
}

// Ginibre matrix scaled so that its spectrum fills the unit disk.
inline Matrix sample_ginibre(int n, Rng& rng) { return gaussian_matrix(n, rng, 1.0 / n); }

// Diagonal of H: the i/(n+1) quantiles of mu, i = 1..n.
inline std::vector<double> quantile_spectrum(const MeasureRPlus& mu, int n) {
  std::vector<double> d(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = mu.quantile((i + 1.0) / (n + 1.0));
  return d;
}

enum class Conjugation { haar, none };

/// T = U H with U Haar and H = diag(quantiles of mu). With Conjugation::haar
/// the product is further conjugated by an independent Haar unitary; spectra
/// and singular values of T - lambda do not change under that conjugation,
/// so the spectral checks use Conjugation::none.
inline Matrix sample_rdiagonal(const MeasureRPlus& mu, int n, Rng& rng, Conjugation conj = Conjugation::haar) {
  if (n < 2) fail(ErrorCode::domain_error, "sample_rdiagonal needs n >= 2");
  const std::vector<double> diag = quantile_spectrum(mu, n);
  Matrix t = sample_haar_unitary(n, rng);
  for (int j = 0; j < n; ++j) t.col(j) *= diag[static_cast<std::size_t>(j)];
  if (conj == Conjugation::haar) {
    const Matrix v = sample_haar_unitary(n, rng);
    t = v * t * v.adjoint();
  }
  return t;
}

/// Sorted sample defining a right-continuous empirical distribution.
struct EmpiricalCdf {
  std::vector<double> sorted;

  explicit EmpiricalCdf(std::vector<double> samples) : sorted(std::move(samples)) {
    std::sort(sorted.begin(), sorted.end());
  }
  double operator()(double x) const {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
  }
  double left_limit(double x) const {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
  }
};

/// sup |F_n - F| over the jump points of F_n, comparing both one-sided
/// limits. `analytic_left` supplies F(x-) when F itself jumps.
inline double ks_distance(const EmpiricalCdf& empirical, const std::function<double(double)>& analytic,
                          const std::function<double(double)>& analytic_left = {}) {
  if (empirical.sorted.empty()) fail(ErrorCode::domain_error, "ks_distance needs a nonempty sample");
  const auto& xs = empirical.sorted;
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < xs.size()) {
    std::size_t j = i;
    while (j < xs.size() && xs[j] == xs[i]) ++j;
    const double f = analytic(xs[i]);
    const double f_left = analytic_left ? analytic_left(xs[i]) : f;
    d = std::max(d, std::abs(static_cast<double>(j) / n - f));
    d = std::max(d, std::abs(static_cast<double>(i) / n - f_left));
    i = j;
  }
  return d;
}

// Two-sample KS distance over the pooled jump points.
inline double ks_two_sample(const EmpiricalCdf& a, const EmpiricalCdf& b) {
  double d = 0.0;
  for (const auto* src : {&a.sorted, &b.sorted}) {
    for (double x : *src) {
      d = std::max(d, std::abs(a(x) - b(x)));
      d = std::max(d, std::abs(a.left_limit(x) - b.left_limit(x)));
    }
  }
  return d;
}

/// Eigenvalues through LAPACK zgeev (values only).
inline std::vector<cplx> eigenvalues(const Matrix& t) {
  if (t.rows() != t.cols()) fail(ErrorCode::domain_error, "eigenvalues need a square matrix");
  Matrix work = t;
  const auto n = static_cast<lapack_int>(t.rows());
  std::vector<cplx> w(static_cast<std::size_t>(n));
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, reinterpret_cast<lapack_complex_double*>(work.data()), n,
                    reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, 1, nullptr, 1);
  if (info != 0) fail(ErrorCode::eigen_failure, "zgeev failed with info = " + std::to_string(info));
  return w;
}

struct EmpiricalBrown {
  std::vector<cplx> eigenvalues;
  EmpiricalCdf radial_cdf{{}};
};

inline EmpiricalBrown empirical_brown(const Matrix& t) {
  EmpiricalBrown out;
  out.eigenvalues = eigenvalues(t);
  std::vector<double> moduli;
  moduli.reserve(out.eigenvalues.size());
  for (const cplx& z : out.eigenvalues) moduli.push_back(std::abs(z));
  out.radial_cdf = EmpiricalCdf(std::move(moduli));
  return out;
}

// Singular values of t - lambda I, ascending.
inline std::vector<double> singular_values_shifted(const Matrix& t, cplx lambda) {
  Matrix a = t;
  a.diagonal().array() -= lambda;
  const Matrix gram = a.adjoint() * a;
  const Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorCode::eigen_failure, "Hermitian eigen-solver failed");
  std::vector<double> sv(static_cast<std::size_t>(gram.rows()));
  for (Eigen::Index i = 0; i < gram.rows(); ++i) sv[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, es.eigenvalues()(i)));
  return sv;
}

struct SymmetrizedLawRow {
  double t = 0.0;
  double h_lambda = 0.0;  // t * mean 1/(sigma^2 + t^2)
  double log_det = 0.0;   // mean log(sigma^2 + t^2)
};

struct SymmetrizedLaw {
  std::vector<double> singular_values;
  std::vector<SymmetrizedLawRow> rows;
};

/// Empirical h_lambda(t) and regularized log-determinant from the singular
/// values of T - lambda.
inline SymmetrizedLaw empirical_symmetrized_law(const Matrix& t, cplx lambda, const std::vector<double>& t_list) {
  SymmetrizedLaw out;
  out.singular_values = singular_values_shifted(t, lambda);
  const double n = static_cast<double>(out.singular_values.size());
  for (double tt : t_list) {
    if (!(tt > 0.0)) fail(ErrorCode::domain_error, "t values must be positive");
    double inv = 0.0;
    double logs = 0.0;
    for (double s : out.singular_values) {
      const double v = s * s + tt * tt;
      inv += 1.0 / v;
      logs += std::log(v);
    }
    out.rows.push_back({tt, tt * inv / n, logs / n});
  }
  return out;
}

/// Normalized traces of the 2x2 Hermitian-reduction blocks for A = lambda - T:
///   diag     = eps tau([A A* + eps^2]^-1)
///   off      = tau(A [A* A + eps^2]^-1)
///   off_conj = tau(A* [A A* + eps^2]^-1)
struct BlockTraces {
  double diag = 0.0;
  cplx off;
  cplx off_conj;
};

inline BlockTraces empirical_block_traces(const Matrix& t, cplx lambda, double eps) {
  const Eigen::Index n = t.rows();
  Matrix a = -t;
  a.diagonal().array() += lambda;
  Matrix gram = a.adjoint() * a;
  gram.diagonal().array() += eps * eps;
  const Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) fail(ErrorCode::eigen_failure, "Cholesky factorization failed");
  const Matrix inv = llt.solve(Matrix::Identity(n, n));  // [A* A + eps^2]^-1
  // A A* and A* A share their spectrum, and A* [A A* + eps^2]^-1 = [A* A + eps^2]^-1 A*.
  BlockTraces out;
  const double dn = static_cast<double>(n);
  out.diag = eps * inv.trace().real() / dn;
  // tr(X Y) = sum_ij X_ij Y_ji without forming the product
  out.off = a.cwiseProduct(inv.transpose()).sum() / dn;
  out.off_conj = inv.cwiseProduct(a.conjugate()).sum() / dn;
  return out;
}

}  // namespace rdiag::mc
