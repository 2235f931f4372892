#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rdiag/error.hpp"
#include "rdiag/extended.hpp"
#include "rdiag/quadrature.hpp"

namespace rdiag {

enum class Representation { atomic, density_grid, empirical };

// Power-law behaviour of a density at the ends of its support.
//   lower_exponent p: density ~ u^p as u -> 0+ (only tracked when the support
//                     starts at 0; +inf otherwise)
//   upper_decay q:    density ~ u^-q as u -> inf (+inf for bounded support)
// Moment divergence of the continuum measure is read off these, because a
// quadrature rule always returns a finite number.
struct EndpointBehaviour {
  double lower_exponent = std::numeric_limits<double>::infinity();
  double upper_decay = std::numeric_limits<double>::infinity();
};

struct DensityOptions {
  double zero_atom = 0.0;
  // Reject the rule when the raw mass moves by more than this (relative)
  // under node doubling.
  double convergence_tol = 1e-8;
  bool check_convergence = true;
  // Interior points where the density has a kink or jump; the rule is then
  // composite with one cosine-mapped panel per piece.
  std::vector<double> breakpoints;
};

/// A probability measure on [0, inf), stored as weighted strictly positive
/// support points plus an explicit atom at the origin.
///
/// Every representation reduces to the same weighted point set, so all
/// integrals are finite sums. Density grids additionally keep their support
/// interval and endpoint behaviour so that divergent negative or high moments
/// of the underlying continuum are reported as divergent.
class MeasureRPlus {
 public:
  Representation representation() const { return repr_; }
  std::span<const double> positions() const { return positions_; }
  std::span<const double> weights() const { return weights_; }
  double zero_atom() const { return zero_atom_; }
  // Factor applied to the raw quadrature mass of a density (1 otherwise).
  double renormalization() const { return renormalization_; }
  const EndpointBehaviour& endpoints() const { return endpoints_; }
  double support_lower() const { return support_lo_; }
  double support_upper() const { return support_hi_; }
  std::size_t size() const { return positions_.size(); }

  double total_mass() const {
    return zero_atom_ + std::accumulate(weights_.begin(), weights_.end(), 0.0);
  }

  // sum_i w_i f(x_i) + zero_atom * f(0)
  template <class F>
  double integrate(F&& f) const {
    double sum = integrate_positive(f);
    if (zero_atom_ > 0.0) sum += zero_atom_ * f(0.0);
    return sum;
  }

  // Integral over (0, inf) only; f is never evaluated at 0.
  template <class F>
  double integrate_positive(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < positions_.size(); ++i) sum += weights_[i] * f(positions_[i]);
    return sum;
  }

  // True when the continuum integral of u^k diverges.
  bool moment_diverges(double k) const {
    constexpr double slack = 1e-6;
    if (k < 0.0 && zero_atom_ > 0.0) return true;
    if (k < 0.0 && endpoints_.lower_exponent + k <= -1.0 + slack) return true;
    if (k > 0.0 && k - endpoints_.upper_decay >= -1.0 - slack) return true;
    return false;
  }

  // Integral of u^k, +inf-tagged when divergent.
  Extended moment(double k) const {
    if (moment_diverges(k)) return Extended::pos_infinity();
    if (k == 0.0) return total_mass();
    return integrate_positive([k](double x) { return std::pow(x, k); });
  }

  // Distribution function. Density grids spread each weight uniformly over
  // the cell between neighbouring node midpoints.
  double cdf(double x) const {
    if (x < 0.0) return 0.0;
    if (repr_ != Representation::density_grid) {
      const auto it = std::upper_bound(positions_.begin(), positions_.end(), x);
      const auto k = static_cast<std::size_t>(it - positions_.begin());
      return std::min(1.0, zero_atom_ + cumulative_[k]);
    }
    const auto it = std::upper_bound(cells_.begin(), cells_.end(), x);
    if (it == cells_.begin()) return zero_atom_;
    if (it == cells_.end()) return 1.0;
    const auto k = static_cast<std::size_t>(it - cells_.begin()) - 1;
    const double frac = (x - cells_[k]) / (cells_[k + 1] - cells_[k]);
    return std::min(1.0, zero_atom_ + cumulative_[k] + frac * weights_[k]);
  }

  // Generalized inverse of cdf on (0, 1).
  double quantile(double p) const {
    if (p <= zero_atom_) return 0.0;
    const double q = p - zero_atom_;
    // cumulative_[k] is the mass strictly before support point k.
    const auto it = std::lower_bound(cumulative_.begin() + 1, cumulative_.end(), q);
    auto k = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    if (k >= positions_.size()) k = positions_.size() - 1;
    if (repr_ != Representation::density_grid) return positions_[k];
    const double frac = std::clamp((q - cumulative_[k]) / weights_[k], 0.0, 1.0);
    return cells_[k] + frac * (cells_[k + 1] - cells_[k]);
  }

  static MeasureRPlus from_points(Representation repr, std::vector<std::pair<double, double>> points,
                                  double zero_atom) {
    std::sort(points.begin(), points.end());
    MeasureRPlus m;
    m.repr_ = repr;
    m.zero_atom_ = zero_atom;
    for (const auto& [x, w] : points) {
      if (!m.positions_.empty() && m.positions_.back() == x) {
        m.weights_.back() += w;
      } else {
        m.positions_.push_back(x);
        m.weights_.push_back(w);
      }
    }
    if (!m.positions_.empty()) {
      m.support_lo_ = m.positions_.front();
      m.support_hi_ = m.positions_.back();
    }
    if (zero_atom > 0.0) m.support_lo_ = 0.0;
    m.build_cumulative();
    return m;
  }

 private:
  friend MeasureRPlus make_density(const std::function<double(double)>&, double, double, int,
                                   const DensityOptions&);
  friend MeasureRPlus pushforward_square(const MeasureRPlus&);

  void build_cumulative() {
    cumulative_.assign(positions_.size() + 1, 0.0);
    for (std::size_t i = 0; i < positions_.size(); ++i) cumulative_[i + 1] = cumulative_[i] + weights_[i];
    if (repr_ != Representation::density_grid || positions_.empty()) return;
    cells_.resize(positions_.size() + 1);
    cells_.front() = support_lo_;
    for (std::size_t i = 1; i < positions_.size(); ++i) cells_[i] = 0.5 * (positions_[i - 1] + positions_[i]);
    cells_.back() = std::isfinite(support_hi_)
                        ? support_hi_
                        : positions_.back() + 0.5 * (positions_.back() - positions_[positions_.size() - 2]);
  }

  Representation repr_ = Representation::atomic;
  std::vector<double> positions_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  std::vector<double> cells_;
  double zero_atom_ = 0.0;
  double renormalization_ = 1.0;
  double support_lo_ = 0.0;
  double support_hi_ = 0.0;
  EndpointBehaviour endpoints_;
};

namespace detail {

constexpr double mass_tol = 1e-12;

inline double clean_zero_atom(double d) {
  if (!(d >= 0.0 && d <= 1.0 + mass_tol)) {
    fail(ErrorCode::non_normalized, "zero_atom must lie in [0, 1], got " + std::to_string(d));
  }
  return std::min(d, 1.0);
}

// Exponent p with f(x) ~ C |x - x0|^p, from two probes approaching x0.
inline double local_exponent(const std::function<double(double)>& f, double near, double far,
                             double dist_near, double dist_far) {
  const double f_near = f(near);
  const double f_far = f(far);
  if (!(f_near > 0.0) && !(f_far > 0.0)) return std::numeric_limits<double>::infinity();
  if (!(f_near > 0.0) || !(f_far > 0.0)) return std::numeric_limits<double>::infinity();
  return std::log(f_far / f_near) / std::log(dist_far / dist_near);
}

}  // namespace detail

// Atoms at position 0 are folded into zero_atom.
inline MeasureRPlus make_atomic(const std::vector<std::pair<double, double>>& atoms, double zero_atom = 0.0) {
  double zero = detail::clean_zero_atom(zero_atom);
  double mass = zero;
  std::vector<std::pair<double, double>> points;
  for (const auto& [x, w] : atoms) {
    if (!(x >= 0.0)) fail(ErrorCode::negative_support, "atom position " + std::to_string(x) + " < 0");
    if (!(w > 0.0)) fail(ErrorCode::non_normalized, "atom weight must be positive");
    mass += w;
    if (x == 0.0) {
      zero += w;
    } else {
      points.emplace_back(x, w);
    }
  }
  if (std::abs(mass - 1.0) > detail::mass_tol) {
    fail(ErrorCode::non_normalized, "atomic weights sum to " + std::to_string(mass));
  }
  return MeasureRPlus::from_points(Representation::atomic, std::move(points), std::min(zero, 1.0));
}

// Equal weights; zero samples feed the atom at the origin.
inline MeasureRPlus make_empirical(const std::vector<double>& samples) {
  if (samples.empty()) fail(ErrorCode::non_normalized, "empirical measure needs at least one sample");
  const double w = 1.0 / static_cast<double>(samples.size());
  double zero = 0.0;
  std::vector<std::pair<double, double>> points;
  for (double x : samples) {
    if (!(x >= 0.0)) fail(ErrorCode::negative_support, "sample " + std::to_string(x) + " < 0");
    if (x == 0.0) {
      zero += w;
    } else {
      points.emplace_back(x, w);
    }
  }
  return MeasureRPlus::from_points(Representation::empirical, std::move(points), std::min(zero, 1.0));
}

/// Discretizes a density on (a, b) into a fixed quadrature rule.
///
/// Finite intervals use Gauss-Legendre after a cosine substitution that
/// clusters nodes at both ends; b = +inf uses x = a + u/(1-u) first. The
/// weights are rescaled so the continuous part has mass 1 - zero_atom, and
/// the applied factor is kept in renormalization().
inline MeasureRPlus make_density(const std::function<double(double)>& density, double a, double b, int n_nodes,
                                 const DensityOptions& options = {}) {
  if (!(a >= 0.0) || !(b > a)) fail(ErrorCode::domain_error, "density support must satisfy 0 <= a < b");
  if (n_nodes < 2) fail(ErrorCode::domain_error, "density needs at least 2 nodes");
  const double zero = detail::clean_zero_atom(options.zero_atom);
  const bool bounded = std::isfinite(b);

  std::vector<double> cuts{a};
  for (double x : options.breakpoints) {
    if (x > cuts.back() && x < b) cuts.push_back(x);
  }
  cuts.push_back(b);
  auto build_rule = [&](int n) {
    if (cuts.size() == 2) return bounded ? quad::cosine_mapped(a, b, n) : quad::semi_infinite(a, n);
    // nodes shared out by panel length; an infinite last panel gets an equal share
    const std::size_t panels = cuts.size() - 1;
    const double span = bounded ? b - a : cuts[panels - 1] - a;
    quad::Rule rule;
    for (std::size_t k = 0; k < panels; ++k) {
      const bool tail = !std::isfinite(cuts[k + 1]);
      const double share = tail ? 1.0 / static_cast<double>(panels) : (cuts[k + 1] - cuts[k]) / span;
      const int m = std::max(8, static_cast<int>(std::lround(n * share)));
      const quad::Rule part = tail ? quad::semi_infinite(cuts[k], m) : quad::cosine_mapped(cuts[k], cuts[k + 1], m);
      rule.nodes.insert(rule.nodes.end(), part.nodes.begin(), part.nodes.end());
      rule.weights.insert(rule.weights.end(), part.weights.begin(), part.weights.end());
    }
    return rule;
  };
  auto raw_mass = [&](const quad::Rule& rule, std::vector<double>* values) {
    double mass = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double f = density(rule.nodes[i]);
      if (!(f >= 0.0)) {
        fail(ErrorCode::negative_density, "density is negative or NaN at x = " + std::to_string(rule.nodes[i]));
      }
      if (values) values->push_back(f);
      mass += rule.weights[i] * f;
    }
    return mass;
  };

  const quad::Rule rule = build_rule(n_nodes);
  std::vector<double> values;
  values.reserve(rule.nodes.size());
  const double mass = raw_mass(rule, &values);
  if (!(mass > 0.0) || !std::isfinite(mass)) fail(ErrorCode::non_integrable, "density has no finite positive mass");
  if (options.check_convergence) {
    const double refined = raw_mass(build_rule(2 * n_nodes), nullptr);
    if (!(std::abs(refined - mass) <= options.convergence_tol * std::abs(refined))) {
      fail(ErrorCode::non_integrable, "density mass unstable under node doubling: " + std::to_string(mass) +
                                          " vs " + std::to_string(refined));
    }
  }

  const double scale = (1.0 - zero) / mass;
  std::vector<std::pair<double, double>> points;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double w = rule.weights[i] * values[i] * scale;
    if (w > 0.0) points.emplace_back(rule.nodes[i], w);
  }
  MeasureRPlus m = MeasureRPlus::from_points(Representation::density_grid, std::move(points), zero);
  m.renormalization_ = 1.0 / mass;
  m.support_lo_ = a;
  m.support_hi_ = b;
  if (a == 0.0) {
    const double span = bounded ? b : 1.0;
    m.endpoints_.lower_exponent =
        detail::local_exponent(density, 1e-10 * span, 1e-8 * span, 1e-10 * span, 1e-8 * span);
  }
  if (!bounded) {
    // density ~ x^-q: exponent of 1/x at two large abscissae
    const double x1 = std::max(1.0, a) * 1e6;
    const double x2 = std::max(1.0, a) * 1e8;
    const double f1 = density(x1);
    const double f2 = density(x2);
    m.endpoints_.upper_decay = (f1 > 0.0 && f2 > 0.0) ? std::log(f1 / f2) / std::log(x2 / x1)
                                                      : std::numeric_limits<double>::infinity();
  }
  m.build_cumulative();
  return m;
}

/// Image of mu under u -> u^2 (bridges the law of |T| and that of T*T).
inline MeasureRPlus pushforward_square(const MeasureRPlus& mu) {
  MeasureRPlus out = mu;
  for (double& x : out.positions_) x *= x;
  out.support_lo_ = mu.support_lo_ * mu.support_lo_;
  out.support_hi_ = std::isfinite(mu.support_hi_) ? mu.support_hi_ * mu.support_hi_ : mu.support_hi_;
  // f(u) ~ u^p  =>  g(v) = f(sqrt v) / (2 sqrt v) ~ v^((p-1)/2); same for the tail.
  out.endpoints_.lower_exponent = 0.5 * (mu.endpoints_.lower_exponent - 1.0);
  out.endpoints_.upper_decay = 0.5 * (mu.endpoints_.upper_decay + 1.0);
  out.build_cumulative();
  return out;
}

// True iff all the mass sits at one point (position tolerance 1e-12).
inline bool is_dirac(const MeasureRPlus& mu) {
  if (mu.zero_atom() >= 1.0 - detail::mass_tol) return true;
  if (mu.zero_atom() > 0.0 || mu.size() == 0) return false;
  const auto pos = mu.positions();
  return pos.back() - pos.front() <= 1e-12 * std::max(1.0, pos.back());
}

struct LambdaBounds {
  double lambda1 = 0.0;
  Extended lambda2 = 0.0;
  bool dirac = false;  // lambda1 == lambda2 in that case
};

/// Inner and outer radii: lambda1 = (int u^-2)^(-1/2) with inf^(-1/2) = 0,
/// lambda2 = (int u^2)^(1/2), possibly +inf.
inline LambdaBounds lambda_bounds(const MeasureRPlus& mu) {
  LambdaBounds lb;
  lb.dirac = is_dirac(mu);
  const Extended inv_sq = mu.moment(-2.0);
  if (inv_sq.is_finite() && inv_sq.value() > 0.0) lb.lambda1 = 1.0 / std::sqrt(inv_sq.value());
  const Extended sq = mu.moment(2.0);
  lb.lambda2 = sq.is_finite() ? Extended(std::sqrt(sq.value())) : Extended::pos_infinity();
  return lb;
}

/// Even extension of a half-line measure: B -> (mu(B) + mu(-B)) / 2.
class SymmetricMeasure {
 public:
  explicit SymmetricMeasure(MeasureRPlus base) : base_(std::move(base)) {}

  const MeasureRPlus& base() const { return base_; }

  // Integral of an arbitrary kernel over the real line.
  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    const auto x = base_.positions();
    const auto w = base_.weights();
    for (std::size_t i = 0; i < x.size(); ++i) sum += 0.5 * w[i] * (f(x[i]) + f(-x[i]));
    if (base_.zero_atom() > 0.0) sum += base_.zero_atom() * f(0.0);
    return sum;
  }

  // For even kernels this is the half-line integral against base().
  template <class F>
  double integrate_even(F&& f) const {
    return base_.integrate(std::forward<F>(f));
  }

 private:
  MeasureRPlus base_;
};

inline SymmetricMeasure symmetrize(const MeasureRPlus& mu) { return SymmetricMeasure(mu); }

}  // namespace rdiag
