#pragma once

#include <cmath>
#include <functional>
#include <numbers>

#include "rdiag/measures.hpp"

namespace rdiag::builtin {

// Default rule size for the named densities.
inline constexpr int default_nodes = 256;

// Quarter-circle law on [0, R]: (4 / (pi R^2)) sqrt(R^2 - x^2). Radius 2 is
// the singular-value law of a standard circular element.
inline std::function<double(double)> quarter_circle_density(double radius) {
  return [radius](double x) {
    const double v = radius * radius - x * x;
    return v > 0.0 ? 4.0 / (std::numbers::pi * radius * radius) * std::sqrt(v) : 0.0;
  };
}

// Continuous part of Marchenko-Pastur with ratio c and unit mean; for c > 1
// the law also has an atom of mass 1 - 1/c at the origin.
inline std::function<double(double)> marchenko_pastur_density(double rate) {
  const double a = (1.0 - std::sqrt(rate)) * (1.0 - std::sqrt(rate));
  const double b = (1.0 + std::sqrt(rate)) * (1.0 + std::sqrt(rate));
  return [a, b, rate](double x) {
    const double v = (b - x) * (x - a);
    return (v > 0.0 && x > 0.0) ? std::sqrt(v) / (2.0 * std::numbers::pi * rate * x) : 0.0;
  };
}

inline std::function<double(double)> uniform_density(double a, double b) {
  return [a, b](double x) { return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0; };
}

inline MeasureRPlus quarter_circle(double radius = 2.0, int nodes = default_nodes, DensityOptions opt = {}) {
  return make_density(quarter_circle_density(radius), 0.0, radius, nodes, opt);
}

inline MeasureRPlus marchenko_pastur(double rate = 1.0, int nodes = default_nodes, DensityOptions opt = {}) {
  const double a = (1.0 - std::sqrt(rate)) * (1.0 - std::sqrt(rate));
  const double b = (1.0 + std::sqrt(rate)) * (1.0 + std::sqrt(rate));
  if (rate > 1.0) opt.zero_atom = 1.0 - 1.0 / rate;
  return make_density(marchenko_pastur_density(rate), a, b, nodes, opt);
}

inline MeasureRPlus uniform(double a, double b, int nodes = default_nodes, DensityOptions opt = {}) {
  return make_density(uniform_density(a, b), a, b, nodes, opt);
}

// 1/2 (delta_1 + delta_2), the running two-atom example.
inline MeasureRPlus two_atoms() { return make_atomic({{1.0, 0.5}, {2.0, 0.5}}); }

}  // namespace rdiag::builtin
