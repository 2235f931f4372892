#pragma once

// Measure specification files (JSON):
//   {"type": "atomic",    "atoms": [[pos, w], ...], "zero_atom": d}
//   {"type": "empirical", "samples": [...]}
//   {"type": "density",   "density": {"name": "quarter_circle" | "marchenko_pastur" | "uniform" | "table",
//                                     "params": {...}, "support": [a, b], "nodes": n},
//                         "zero_atom": d}
// b may be a number, "inf" or null (unbounded).

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rdiag/builtins.hpp"
#include "rdiag/error.hpp"
#include "rdiag/measures.hpp"

namespace rdiag::io {

using json = nlohmann::json;

struct DensitySpec {
  std::string name;
  json params = json::object();
  std::optional<std::pair<double, double>> support;
  int nodes = builtin::default_nodes;
};

struct MeasureSpec {
  std::string type;
  std::vector<std::pair<double, double>> atoms;
  std::vector<double> samples;
  DensitySpec density;
  double zero_atom = 0.0;
};

namespace detail {

[[noreturn]] inline void invalid(const std::string& msg) { fail(ErrorCode::input_error, msg); }

inline double as_bound(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    invalid("unrecognized support bound \"" + s + "\"");
  }
  if (!j.is_number()) invalid("support bounds must be numbers, \"inf\" or null");
  return j.get<double>();
}

inline double param(const json& params, const char* key, double fallback) {
  if (!params.contains(key)) return fallback;
  if (!params.at(key).is_number()) invalid(std::string("density parameter \"") + key + "\" must be a number");
  return params.at(key).get<double>();
}

// Piecewise-linear density through tabulated points, zero outside.
inline std::function<double(double)> table_density(const json& params) {
  if (!params.contains("x") || !params.contains("f")) invalid("table density needs params.x and params.f");
  auto xs = params.at("x").get<std::vector<double>>();
  auto fs = params.at("f").get<std::vector<double>>();
  if (xs.size() != fs.size() || xs.size() < 2) invalid("table density needs matching x and f with >= 2 points");
  if (!std::is_sorted(xs.begin(), xs.end())) invalid("table density x must be increasing");
  return [xs = std::move(xs), fs = std::move(fs)](double x) {
    if (x < xs.front() || x > xs.back()) return 0.0;
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.end()) return fs.back();
    const auto k = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return (1.0 - t) * fs[k - 1] + t * fs[k];
  };
}

}  // namespace detail

inline MeasureSpec parse_measure_spec(const json& j) {
  if (!j.is_object()) detail::invalid("measure spec must be a JSON object");
  MeasureSpec spec;
  try {
    spec.type = j.at("type").get<std::string>();
    spec.zero_atom = j.value("zero_atom", 0.0);
    if (spec.type == "atomic") {
      for (const auto& atom : j.at("atoms")) {
        if (!atom.is_array() || atom.size() != 2) detail::invalid("atoms must be [position, weight] pairs");
        spec.atoms.emplace_back(atom[0].get<double>(), atom[1].get<double>());
      }
    } else if (spec.type == "empirical") {
      spec.samples = j.at("samples").get<std::vector<double>>();
    } else if (spec.type == "density") {
      const json& d = j.at("density");
      spec.density.name = d.at("name").get<std::string>();
      spec.density.params = d.value("params", json::object());
      spec.density.nodes = d.value("nodes", builtin::default_nodes);
      if (d.contains("support")) {
        const json& s = d.at("support");
        if (!s.is_array() || s.size() != 2) detail::invalid("support must be [a, b]");
        spec.density.support = {detail::as_bound(s[0]), detail::as_bound(s[1])};
      }
    } else {
      detail::invalid("unknown measure type \"" + spec.type + "\"");
    }
  } catch (const json::exception& e) {
    detail::invalid(std::string("malformed measure spec: ") + e.what());
  }
  return spec;
}

inline MeasureSpec load_measure_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::input_not_found, "cannot open measure file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    detail::invalid("measure file is not valid JSON: " + std::string(e.what()));
  }
  return parse_measure_spec(j);
}

/// Builds the measure; `nodes_override` replaces the rule size of a density.
inline MeasureRPlus build_measure(const MeasureSpec& spec, std::optional<int> nodes_override = std::nullopt,
                                  bool check_convergence = true) {
  if (spec.type == "atomic") return make_atomic(spec.atoms, spec.zero_atom);
  if (spec.type == "empirical") return make_empirical(spec.samples);

  const DensitySpec& d = spec.density;
  DensityOptions opt;
  opt.zero_atom = spec.zero_atom;
  opt.check_convergence = check_convergence;
  const int nodes = nodes_override.value_or(d.nodes);
  std::function<double(double)> f;
  double a = 0.0;
  double b = 0.0;
  if (d.name == "quarter_circle") {
    const double radius = detail::param(d.params, "radius", 2.0);
    if (!(radius > 0.0)) detail::invalid("quarter_circle radius must be positive");
    f = builtin::quarter_circle_density(radius);
    a = 0.0;
    b = radius;
  } else if (d.name == "marchenko_pastur") {
    const double rate = detail::param(d.params, "rate", 1.0);
    if (!(rate > 0.0)) detail::invalid("marchenko_pastur rate must be positive");
    f = builtin::marchenko_pastur_density(rate);
    a = (1.0 - std::sqrt(rate)) * (1.0 - std::sqrt(rate));
    b = (1.0 + std::sqrt(rate)) * (1.0 + std::sqrt(rate));
    if (rate > 1.0 && spec.zero_atom == 0.0) opt.zero_atom = 1.0 - 1.0 / rate;
  } else if (d.name == "uniform") {
    a = detail::param(d.params, "a", d.support ? d.support->first : 0.0);
    b = detail::param(d.params, "b", d.support ? d.support->second : 1.0);
    f = builtin::uniform_density(a, b);
  } else if (d.name == "table") {
    f = detail::table_density(d.params);
    const auto xs = d.params.at("x").get<std::vector<double>>();
    a = xs.front();
    b = xs.back();
    opt.breakpoints.assign(xs.begin() + 1, xs.end() - 1);
  } else {
    detail::invalid("unknown density \"" + d.name + "\"");
  }
  if (d.support) {
    a = d.support->first;
    b = d.support->second;
  }
  return make_density(f, a, b, nodes, opt);
}

}  // namespace rdiag::io
