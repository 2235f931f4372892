#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace rdiag::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre nodes and weights on (-1, 1), ascending.
inline Rule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

// Rule on (a, b) after the substitution x = a + (b - a)(1 - cos(phi)) / 2,
// with Gauss-Legendre in phi over (0, pi). Clusters nodes quadratically at
// both ends, which absorbs square-root type endpoint behaviour of the
// integrand into a smooth one.
inline Rule cosine_mapped(double a, double b, int n) {
  const Rule gl = gauss_legendre(n);
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half_len = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    const double phi = 0.5 * std::numbers::pi * (gl.nodes[i] + 1.0);
    const double dphi = 0.5 * std::numbers::pi * gl.weights[i];
    rule.nodes[i] = a + half_len * (1.0 - std::cos(phi));
    rule.weights[i] = half_len * std::sin(phi) * dphi;
  }
  return rule;
}

// Rule on (a, +inf): x = a + u / (1 - u) with u cosine-mapped on (0, 1).
inline Rule semi_infinite(double a, int n) {
  const Rule inner = cosine_mapped(0.0, 1.0, n);
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double u = inner.nodes[i];
    const double one_minus = 1.0 - u;
    rule.nodes[i] = a + u / one_minus;
    rule.weights[i] = inner.weights[i] / (one_minus * one_minus);
  }
  return rule;
}

template <class F>
double integrate(F&& f, const Rule& rule) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(rule.nodes[i]);
  return sum;
}

}  // namespace rdiag::quad
