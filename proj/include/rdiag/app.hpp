#pragma once

// Command-line front end: option parsing, dispatch and output writing.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rdiag/brown.hpp"
#include "rdiag/error.hpp"
#include "rdiag/measure_io.hpp"
#include "rdiag/subordination.hpp"
#include "rdiag/validation.hpp"

namespace rdiag::app {

using json = nlohmann::json;

enum class Format { csv, json };

struct Grid {
  double lo = 0.0;
  double hi = 0.0;
  int n = 0;
  std::vector<double> points() const {
    std::vector<double> p;
    for (int i = 0; i < n; ++i) p.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1.0));
    return p;
  }
};

struct RunConfig {
  std::string command;
  std::string measure_path;
  std::optional<Grid> grid;
  std::optional<double> t;
  std::vector<cplx> lambdas;
  std::vector<double> t_list;
  std::string output_path;  // empty: standard output
  std::string moduli_path;  // validate-mc only
  Format format = Format::csv;
  std::uint64_t seed = 1;
  int n = 500;
  int samples = 1;
  std::map<std::string, double> tolerances;
};

struct Outcome {
  int exit_code = 0;
  std::string output;
};

inline std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string fmt(const Extended& x) { return fmt(x.to_double()); }

// JSON has no infinities; +-inf are written as strings.
inline json jnum(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}
inline json jnum(const Extended& x) { return jnum(x.to_double()); }

// ---------------------------------------------------------------------------
// Option parsing helpers

inline Grid parse_grid(const std::string& s) {
  Grid g;
  char c1 = 0;
  char c2 = 0;
  std::istringstream in(s);
  if (!(in >> g.lo >> c1 >> g.hi >> c2 >> g.n) || c1 != ':' || c2 != ':' || !in.eof()) {
    fail(ErrorCode::input_error, "grid must be rmin:rmax:n, got \"" + s + "\"");
  }
  if (!(g.lo > 0.0) || !(g.hi >= g.lo) || g.n < 1) {
    fail(ErrorCode::input_error, "grid needs 0 < rmin <= rmax and n >= 1");
  }
  return g;
}

inline cplx parse_lambda(const std::string& s) {
  double re = 0.0;
  double im = 0.0;
  char comma = 0;
  std::istringstream in(s);
  if (!(in >> re >> comma >> im) || comma != ',' || !in.eof()) {
    fail(ErrorCode::input_error, "lambda must be re,im, got \"" + s + "\"");
  }
  return {re, im};
}

inline std::pair<std::string, double> parse_tolerance(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) fail(ErrorCode::input_error, "tolerance must be name=value");
  try {
    std::size_t used = 0;
    const double v = std::stod(s.substr(eq + 1), &used);
    if (used != s.size() - eq - 1 || !(v > 0.0)) throw std::invalid_argument("bad");
    return {s.substr(0, eq), v};
  } catch (const std::exception&) {
    fail(ErrorCode::input_error, "tolerance value must be a positive number in \"" + s + "\"");
  }
}

// ---------------------------------------------------------------------------
// Output

/// Writes via a temporary sibling and a rename so readers never see a
/// partial file.
inline void write_atomically(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::input_error, "cannot write " + tmp.string());
    out << content;
    if (!out) fail(ErrorCode::input_error, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::input_error, "cannot move output into place at " + path);
  }
}

inline std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

namespace detail {

inline MeasureRPlus load(const RunConfig& cfg) {
  if (cfg.measure_path.empty()) fail(ErrorCode::input_error, "--measure is required");
  return io::build_measure(io::load_measure_spec(cfg.measure_path));
}

inline cplx single_lambda(const RunConfig& cfg) {
  if (cfg.lambdas.size() != 1) fail(ErrorCode::input_error, "--lambda re,im is required exactly once");
  return cfg.lambdas.front();
}

inline json bounds_json(const KFunction& kf) {
  const LambdaBounds& lb = kf.bounds();
  return {{"lambda1", lb.lambda1},
          {"lambda2", jnum(lb.lambda2)},
          {"zero_mass", kf.measure().base().zero_atom()},
          {"dirac", lb.dirac}};
}

inline std::string brown_output(const KFunction& kf, const RunConfig& cfg) {
  const std::vector<double> radii = cfg.grid ? cfg.grid->points() : annulus_grid(kf, 50);
  const RadialBrownMeasure rbm = radial_brown_measure(kf, radii);
  if (cfg.format == Format::json) {
    json j = bounds_json(kf);
    j["rows"] = json::array();
    for (const auto& row : rbm.grid) j["rows"].push_back({{"r", row.r}, {"cdf", row.cdf}, {"density", row.density}});
    return j.dump(2) + "\n";
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : rbm.grid) rows.push_back({fmt(row.r), fmt(row.cdf), fmt(row.density)});
  return csv({"r", "cdf", "density"}, rows);
}

inline std::string det_output(const KFunction& kf, const RunConfig& cfg) {
  std::vector<cplx> lambdas;
  const cplx base = single_lambda(cfg);
  if (cfg.grid) {
    // radii from the grid along the direction of --lambda
    const cplx phase = std::abs(base) > 0.0 ? base / std::abs(base) : cplx(1.0, 0.0);
    for (double r : cfg.grid->points()) lambdas.push_back(r * phase);
  } else {
    lambdas.push_back(base);
  }
  std::vector<DeterminantValue> values;
  for (const cplx& lambda : lambdas) {
    if (cfg.t && *cfg.t > 0.0) {
      values.push_back(fk_det_regularized(kf, lambda, *cfg.t));
    } else {
      values.push_back(fk_det(kf, lambda));
    }
  }
  if (cfg.format == Format::json) {
    json j = bounds_json(kf);
    j["rows"] = json::array();
    for (const auto& v : values) {
      j["rows"].push_back({{"re_lambda", v.lambda.real()},
                           {"im_lambda", v.lambda.imag()},
                           {"t", v.t},
                           {"log_delta", jnum(v.log_delta)}});
    }
    return j.dump(2) + "\n";
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& v : values) {
    rows.push_back({fmt(v.lambda.real()), fmt(v.lambda.imag()), fmt(v.t), fmt(v.log_delta)});
  }
  return csv({"re_lambda", "im_lambda", "t", "log_delta"}, rows);
}

inline std::string subord_output(const KFunction& kf, const RunConfig& cfg) {
  if (!cfg.grid) fail(ErrorCode::input_error, "subord needs --grid");
  const double t = cfg.t.value_or(0.0);
  if (t < 0.0) fail(ErrorCode::input_error, "--t must be >= 0");
  struct Row {
    double r, t;
    Extended s;
    double residual;
    Extended im_omega1, im_omega2;
  };
  std::vector<Row> rows;
  for (double r : cfg.grid->points()) {
    if (t > 0.0) {
      const SubordinationResult sr = solve_s(kf, r, t);
      rows.push_back({r, t, sr.s, sr.residual, sr.omega1.imag(), sr.omega2.imag()});
    } else {
      const Extended s = s_at_zero(kf, r);
      double residual = 0.0;
      Extended w2 = Extended::pos_infinity();
      if (s.is_finite() && s.value() > 0.0) {
        residual = std::abs(kf(s.value(), 0.0) - r * r);
        w2 = r * r / s.value();
      }
      rows.push_back({r, 0.0, s, residual, s, w2});
    }
  }
  if (cfg.format == Format::json) {
    json j = bounds_json(kf);
    j["rows"] = json::array();
    for (const auto& row : rows) {
      j["rows"].push_back({{"r", row.r},
                           {"t", row.t},
                           {"s", jnum(row.s)},
                           {"residual", row.residual},
                           {"im_omega1", jnum(row.im_omega1)},
                           {"im_omega2", jnum(row.im_omega2)}});
    }
    return j.dump(2) + "\n";
  }
  std::vector<std::vector<std::string>> out;
  for (const auto& row : rows) {
    out.push_back({fmt(row.r), fmt(row.t), fmt(row.s), fmt(row.residual), fmt(row.im_omega1), fmt(row.im_omega2)});
  }
  return csv({"r", "t", "s", "residual", "im_omega1", "im_omega2"}, out);
}

inline std::string moments_output(const KFunction& kf, const RunConfig& cfg) {
  const MeasureRPlus& mu = kf.measure().base();
  json j = bounds_json(kf);
  j["renormalization"] = mu.renormalization();
  j["moments"] = {{"1", jnum(mu.moment(1.0))},
                  {"2", jnum(mu.moment(2.0))},
                  {"-1", jnum(mu.moment(-1.0))},
                  {"-2", jnum(mu.moment(-2.0))}};
  j["log_det"] = jnum(log_det_of(mu));
  if (!cfg.lambdas.empty()) {
    j["per_lambda"] = json::array();
    for (const cplx& lambda : cfg.lambdas) {
      const LambdaBounds sb = shifted_lambda_bounds(kf, lambda);
      j["per_lambda"].push_back({{"re_lambda", lambda.real()},
                                 {"im_lambda", lambda.imag()},
                                 {"negative_moment_first", jnum(negative_moment_first(kf, lambda))},
                                 {"shifted_lambda1", sb.lambda1},
                                 {"shifted_lambda2", jnum(sb.lambda2)}});
    }
  }
  if (cfg.format == Format::json) return j.dump(2) + "\n";
  std::vector<std::vector<std::string>> rows = {
      {"lambda1", fmt(kf.bounds().lambda1)},
      {"lambda2", fmt(kf.bounds().lambda2)},
      {"zero_mass", fmt(mu.zero_atom())},
      {"moment_1", fmt(mu.moment(1.0))},
      {"moment_2", fmt(mu.moment(2.0))},
      {"moment_-1", fmt(mu.moment(-1.0))},
      {"moment_-2", fmt(mu.moment(-2.0))},
      {"log_det", fmt(log_det_of(mu))},
  };
  for (const cplx& lambda : cfg.lambdas) {
    rows.push_back({"negative_moment_first(" + fmt(lambda.real()) + ";" + fmt(lambda.imag()) + ")",
                    fmt(negative_moment_first(kf, lambda))});
  }
  return csv({"quantity", "value"}, rows);
}

inline Outcome validate_mc(const MeasureRPlus& mu, const RunConfig& cfg) {
  McConfig mc_cfg;
  mc_cfg.n = cfg.n;
  mc_cfg.n_samples = cfg.samples;
  mc_cfg.seed = cfg.seed;
  mc_cfg.lambda_list = cfg.lambdas;
  mc_cfg.t_list = cfg.t_list;
  if (cfg.t && cfg.t_list.empty()) mc_cfg.t_list.push_back(*cfg.t);
  if (!mc_cfg.lambda_list.empty() && mc_cfg.t_list.empty()) mc_cfg.t_list.push_back(1.0);
  const McEnsembleReport rep = run_mc_validation(mu, mc_cfg);

  const auto tol_of = [&](const std::string& name, double fallback) {
    const auto it = cfg.tolerances.find(name);
    return it == cfg.tolerances.end() ? fallback : it->second;
  };
  const double ks_tol = tol_of("ks", 0.07);
  const double trace_tol = tol_of("mc_trace", 5e-2);
  bool ok = rep.ks_to_analytic <= ks_tol;
  json j = {{"n", rep.n}, {"n_samples", rep.n_samples}, {"seed", rep.seed},
            {"ks", rep.ks_to_analytic}, {"ks_tolerance", ks_tol}};
  j["per_lambda"] = json::array();
  for (const auto& row : rep.resolvent_trace_estimates) {
    const double err = std::max({std::abs(row.h_empirical - row.h_analytic),
                                 std::abs(row.log_det_empirical - row.log_det_analytic),
                                 std::abs(row.trace_empirical - row.trace_analytic)});
    ok = ok && err <= trace_tol;
    j["per_lambda"].push_back({{"re_lambda", row.lambda.real()},
                               {"im_lambda", row.lambda.imag()},
                               {"t", row.t},
                               {"h_empirical", row.h_empirical},
                               {"h_analytic", row.h_analytic},
                               {"log_det_empirical", row.log_det_empirical},
                               {"log_det_analytic", row.log_det_analytic},
                               {"trace_empirical", {row.trace_empirical.real(), row.trace_empirical.imag()}},
                               {"trace_analytic", {row.trace_analytic.real(), row.trace_analytic.imag()}},
                               {"max_error", err}});
  }
  j["passed"] = ok;
  if (!cfg.moduli_path.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (double m : rep.eigenvalue_moduli) rows.push_back({fmt(m)});
    write_atomically(cfg.moduli_path, csv({"modulus"}, rows));
  }
  return {ok ? 0 : 1, j.dump(2) + "\n"};
}

inline Outcome consistency(const RunConfig& cfg) {
  const io::MeasureSpec spec = io::load_measure_spec(cfg.measure_path);
  const MeasureRPlus mu = io::build_measure(spec);
  ConsistencyOptions opt;
  for (const auto& [name, value] : cfg.tolerances) {
    if (!opt.tolerances.contains(name)) fail(ErrorCode::input_error, "unknown tolerance \"" + name + "\"");
    opt.tolerances[name] = value;
  }
  if (spec.type == "density") {
    opt.refined = [spec] { return io::build_measure(spec, 2 * spec.density.nodes); };
  }
  const ConsistencyReport rep = consistency_suite(mu, opt);
  json j;
  j["passed"] = rep.passed();
  j["checks"] = json::array();
  json failed = json::array();
  for (const auto& c : rep.checks) {
    json jc = {{"name", c.name},
               {"max_error", jnum(c.max_error)},
               {"tolerance", c.tolerance},
               {"skipped", c.skipped},
               {"passed", c.passed()}};
    if (!c.note.empty()) jc["note"] = c.note;
    j["checks"].push_back(jc);
    if (!c.passed()) failed.push_back(c.name);
  }
  j["failed"] = failed;
  return {rep.passed() ? 0 : 1, j.dump(2) + "\n"};
}

}  // namespace detail

/// Executes one command; throws rdiag::Error on failure.
inline Outcome execute(const RunConfig& cfg) {
  if (cfg.command == "consistency") {
    if (cfg.measure_path.empty()) fail(ErrorCode::input_error, "--measure is required");
    return detail::consistency(cfg);
  }
  const MeasureRPlus mu = detail::load(cfg);
  if (cfg.command == "validate-mc") return detail::validate_mc(mu, cfg);
  const KFunction kf(mu);
  if (cfg.command == "cdf" || cfg.command == "density") return {0, detail::brown_output(kf, cfg)};
  if (cfg.command == "det") return {0, detail::det_output(kf, cfg)};
  if (cfg.command == "subord") return {0, detail::subord_output(kf, cfg)};
  if (cfg.command == "moments") return {0, detail::moments_output(kf, cfg)};
  fail(ErrorCode::input_error, "unknown command \"" + cfg.command + "\"");
}

inline int exit_code_for(ErrorCode code) {
  return (code == ErrorCode::input_error || code == ErrorCode::input_not_found) ? 2 : 1;
}

inline std::string error_json(ErrorCode code, const std::string& message, const RunConfig& cfg) {
  const json j = {{"code", std::string(to_string(code))},
                  {"message", message},
                  {"context", {{"command", cfg.command}, {"measure", cfg.measure_path}}}};
  return j.dump() + "\n";
}

/// Runs a parsed configuration: writes the artifact, reports errors as JSON
/// on `err`, and returns the process exit code.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const Outcome outcome = execute(cfg);
    if (cfg.output_path.empty()) {
      out << outcome.output;
    } else {
      write_atomically(cfg.output_path, outcome.output);
    }
    if (outcome.exit_code != 0) {
      err << error_json(ErrorCode::tolerance_exceeded, "validation checks exceeded their tolerances", cfg);
    }
    return outcome.exit_code;
  } catch (const Error& e) {
    err << error_json(e.code(), e.what(), cfg);
    return exit_code_for(e.code());
  }
}

/// Parses argv into a RunConfig and runs it.
inline int main(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App cli{"Brown measures, Fuglede-Kadison determinants and subordination for R-diagonal operators"};
  cli.require_subcommand(1);
  RunConfig cfg;
  std::string grid;
  std::vector<std::string> lambdas;
  std::vector<std::string> tols;
  std::string format = "csv";

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--measure", cfg.measure_path, "measure specification (JSON)");
    sub->add_option("--grid", grid, "radius grid rmin:rmax:n");
    sub->add_option("--lambda", lambdas, "complex point re,im (repeatable)");
    sub->add_option("--t", cfg.t, "regularization t >= 0");
    sub->add_option("--out", cfg.output_path, "output file (default: stdout)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--tol", tols, "tolerance override name=value (repeatable)");
  };
  for (const char* name : {"cdf", "density", "det", "subord", "moments", "consistency"}) {
    common(cli.add_subcommand(name, std::string("run ") + name));
  }
  CLI::App* mc_cmd = cli.add_subcommand("validate-mc", "Monte Carlo validation against random matrices");
  common(mc_cmd);
  mc_cmd->add_option("--n", cfg.n, "matrix dimension")->check(CLI::Range(2, 20000));
  mc_cmd->add_option("--samples", cfg.samples, "number of samples")->check(CLI::Range(1, 100000));
  mc_cmd->add_option("--t-list", cfg.t_list, "t values for the resolvent statistics");
  mc_cmd->add_option("--moduli-out", cfg.moduli_path, "CSV of pooled eigenvalue moduli");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << error_json(ErrorCode::input_error, e.what(), cfg);
    return 2;
  }
  cfg.command = cli.get_subcommands().front()->get_name();
  try {
    if (!grid.empty()) cfg.grid = parse_grid(grid);
    for (const auto& s : lambdas) cfg.lambdas.push_back(parse_lambda(s));
    for (const auto& s : tols) cfg.tolerances.insert(parse_tolerance(s));
    cfg.format = format == "json" ? Format::json : Format::csv;
  } catch (const Error& e) {
    err << error_json(e.code(), e.what(), cfg);
    return exit_code_for(e.code());
  }
  return run(cfg, out, err);
}

}  // namespace rdiag::app
