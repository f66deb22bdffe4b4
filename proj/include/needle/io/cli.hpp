// Copyright 2026 The Needle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: argument parsing, instance I/O and JSON reports.
// Needs CLI11.hpp and json.hpp on the include path.

#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cfloat>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "needle/comparison.hpp"
#include "needle/core.hpp"
#include "needle/density.hpp"
#include "needle/instances.hpp"
#include "needle/isoperimetry.hpp"
#include "needle/localization.hpp"
#include "needle/model_profiles.hpp"
#include "needle/needle1d.hpp"
#include "needle/norms.hpp"
#include "needle/numerics.hpp"

namespace needle::cli {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

/// Reals with the spellings pi, inf and infinity, optionally signed.
inline double parse_real(const std::string& text, const std::string& what) {
  std::string s = lower(text);
  double sign = 1.0;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    if (s[0] == '-') sign = -1.0;
    s.erase(0, 1);
  }
  if (s == "pi") return sign * kPi;
  if (s == "inf" || s == "infinity") return sign * kInf;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::kParseError,
                what + ": cannot parse '" + text + "' as a real");
  }
  return sign * v;
}

inline Dimension parse_dimension(const std::string& text) {
  const double v = parse_real(text, "N");
  if (v == kInf) return Dimension::infinity();
  if (!std::isfinite(v)) throw Error(ErrorKind::kParseError, "N = -inf");
  return Dimension::finite(v);
}

inline ExtendedReal parse_extended(const std::string& text,
                                   const std::string& what) {
  const double v = parse_real(text, what);
  if (v == kInf) return ExtendedReal::positive_infinity();
  if (!(v >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, what + " must be nonnegative");
  }
  return ExtendedReal::finite(v);
}

inline std::pair<double, double> parse_pair(const std::string& text,
                                            const std::string& what) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw Error(ErrorKind::kParseError, what + ": expected 'a,b'");
  }
  return {parse_real(text.substr(0, comma), what),
          parse_real(text.substr(comma + 1), what)};
}

inline std::vector<double> parse_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(item, what));
  if (out.empty()) throw Error(ErrorKind::kParseError, what + ": empty list");
  return out;
}

inline void check_tol(double v, const std::string& what) {
  if (!(v >= DBL_EPSILON) || !std::isfinite(v)) {
    throw Error(ErrorKind::kInvalidArgument,
                what + " must be a finite value >= machine epsilon");
  }
}

inline void check_theta(const std::vector<double>& th) {
  if (th.empty()) throw Error(ErrorKind::kInvalidArgument, "empty theta grid");
  for (double t : th) {
    if (!(t > 0.0 && t < 1.0)) {
      throw Error(ErrorKind::kInvalidArgument, "theta must lie in (0, 1)");
    }
  }
}

/// Non-finite values are written as strings so the output stays JSON.
inline Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0.0 ? "inf" : "-inf";
}

inline Json nums(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline double as_real(const Json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_real(j.get<std::string>(), what);
  throw Error(ErrorKind::kParseError, what + " is not a number");
}

inline std::string dimension_text(const Dimension& N) { return N.to_string(); }

inline Json extended_json(const ExtendedReal& D) { return num(D.as_double()); }

inline Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kParseError, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParseError, path + ": " + e.what());
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kParseError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::kParseError, "write failed for " + path);
}

inline const Json& field(const Json& j, const std::string& key,
                         const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::kMissingField, where + " has no field '" + key + "'");
  }
  return j.at(key);
}

inline std::vector<double> real_array(const Json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorKind::kParseError, what + " is not an array");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(as_real(v, what));
  return out;
}

inline std::vector<double> default_theta_grid() {
  std::vector<double> th;
  for (int k = 0; k <= 20; ++k) th.push_back(0.025 + 0.0475 * k);
  return th;
}

inline Json check_json(const CheckReport& r) {
  return Json{{"trials", r.trials},
              {"violations", r.violations},
              {"vacuous", r.vacuous},
              {"worst_margin", num(r.worst_margin)},
              {"max_abs_margin", num(r.max_abs_margin)},
              {"tolerance", num(r.tolerance)}};
}

inline Json mcp_json(const McpReport& r) {
  return Json{{"trials", r.trials},
              {"violations", r.violations},
              {"a", num(r.a)},
              {"b", num(r.b)},
              {"min_lower_gap", num(r.min_lower_gap)},
              {"max_lower_gap", num(r.max_lower_gap)},
              {"min_upper_gap", num(r.min_upper_gap)},
              {"max_upper_gap", num(r.max_upper_gap)},
              {"tolerance", num(r.tolerance)}};
}

inline Json profile_options_json(const ModelProfileOptions& o) {
  return Json{{"lengths", o.lengths},
              {"positions", o.positions},
              {"cells", o.cells},
              {"refine_cells", o.refine_cells},
              {"refine_rounds", o.refine_rounds}};
}

}  // namespace detail

/// Options shared by the density-based commands.
struct DensityArgs {
  std::string kind = "uniform";
  std::string lo = "0";
  std::string hi = "1";
  double rho_K = 1.0;
  double rho_N = 3.0;
  double mean = 0.0;
  double beta = 1.0;
  std::string input;

  void add_to(CLI::App* app) {
    app->add_option("--density", kind,
                    "uniform | gaussian | sin-power | exp-tilt | sampled")
        ->check(CLI::IsMember(
            {"uniform", "gaussian", "sin-power", "exp-tilt", "sampled"}))
        ->capture_default_str();
    app->add_option("--lo", lo, "left end (uniform, exp-tilt)")
        ->capture_default_str();
    app->add_option("--hi", hi, "right end (uniform, exp-tilt)")
        ->capture_default_str();
    app->add_option("--rho-K", rho_K, "K of the gaussian / sin-power density")
        ->capture_default_str();
    app->add_option("--rho-N", rho_N, "N of the sin-power density")
        ->capture_default_str();
    app->add_option("--mean", mean, "gaussian mean")->capture_default_str();
    app->add_option("--beta", beta, "exp-tilt rate")->capture_default_str();
    app->add_option("--density-input", input,
                    "JSON {\"nodes\": [...], \"values\": [...]} for sampled");
  }

  NeedleDensity build() const {
    const double a = detail::parse_real(lo, "--lo");
    const double b = detail::parse_real(hi, "--hi");
    if (kind == "uniform") return NeedleDensity::uniform(a, b);
    if (kind == "gaussian") return NeedleDensity::gaussian(rho_K, mean);
    if (kind == "sin-power") return NeedleDensity::sin_power(rho_K, rho_N);
    if (kind == "exp-tilt") return NeedleDensity::exp_tilt(beta, a, b);
    if (input.empty()) {
      throw Error(ErrorKind::kMissingField,
                  "sampled density needs --density-input");
    }
    const Json j = detail::read_json(input);
    return NeedleDensity::sampled(
        detail::real_array(detail::field(j, "nodes", input), "nodes"),
        detail::real_array(detail::field(j, "values", input), "values"));
  }

  Json to_json() const {
    Json j{{"kind", kind}};
    if (kind == "uniform" || kind == "exp-tilt") {
      j["lo"] = detail::num(detail::parse_real(lo, "--lo"));
      j["hi"] = detail::num(detail::parse_real(hi, "--hi"));
    }
    if (kind == "exp-tilt") j["beta"] = beta;
    if (kind == "gaussian") {
      j["K"] = rho_K;
      j["mean"] = mean;
    }
    if (kind == "sin-power") {
      j["K"] = rho_K;
      j["N"] = rho_N;
    }
    if (kind == "sampled") j["input"] = input;
    return j;
  }
};

/// A finished command: the report and the text meant for stdout.
struct CommandOutput {
  Json report;
  std::string stdout_text;  // empty: the report itself goes to stdout
  std::size_t violations = 0;
};

inline Json report_header(const std::string& command, std::uint64_t seed) {
  return Json{{"tool", "needle"},
              {"version", std::string(kVersion)},
              {"command", command},
              {"seed", seed}};
}

inline void finish(CommandOutput& out, Json parameters, Json results) {
  out.report["parameters"] = std::move(parameters);
  out.report["results"] = std::move(results);
  out.report["violations"] = out.violations;
  out.report["status"] = out.violations == 0 ? "ok" : "violations";
}

// ---------------------------------------------------------------------------
// profile

struct ProfileArgs {
  double K = 0.0;
  std::string N;
  std::string D = "inf";
  std::vector<double> theta;
  std::string method = "auto";
  bool json = false;
};

inline CommandOutput run_profile(const ProfileArgs& a, std::uint64_t seed) {
  const CdParams params(a.K, detail::parse_dimension(a.N));
  const ExtendedReal D = detail::parse_extended(a.D, "D");
  const std::vector<double> th =
      a.theta.empty() ? detail::default_theta_grid() : a.theta;
  detail::check_theta(th);
  const ModelProfileOptions opts;
  Profile p;
  if (a.method == "auto") {
    p = model_profile({params, D, th}, opts);
  } else if (a.method == "numerical") {
    p = numerical_model_profile({params, D, th}, opts);
  } else if (a.method == "levy-gromov") {
    if (params.N().is_infinite()) {
      throw Error(ErrorKind::kBadDimension, "levy-gromov needs finite N");
    }
    p.theta = th;
    p.method = a.method;
    for (double t : th) {
      p.value.push_back(levy_gromov_profile(a.K, params.N().value(), t));
    }
  } else {
    p.theta = th;
    p.method = a.method;
    for (double t : th) p.value.push_back(bakry_ledoux_profile(a.K, t));
  }
  CommandOutput out;
  out.report = report_header("profile", seed);
  std::string text;
  for (double v : p.value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.7g\n", v);
    text += buf;
  }
  out.stdout_text = a.json ? std::string() : text;
  finish(out,
         Json{{"K", a.K},
              {"N", detail::dimension_text(params.N())},
              {"D", detail::extended_json(D)},
              {"theta", detail::nums(th)},
              {"method", a.method},
              {"model_options", detail::profile_options_json(opts)}},
         Json{{"method", p.method},
              {"theta", detail::nums(p.theta)},
              {"value", detail::nums(p.value)}});
  return out;
}

// ---------------------------------------------------------------------------
// needle-check

struct NeedleCheckArgs {
  DensityArgs density;
  double K = 0.0;
  std::string N;
  std::size_t trials = 10000;
  std::size_t mcp_trials = 1000;
  std::size_t diff_points = 2000;
  double tol = 1e-9;
  double diff_tol = 1e-6;
  std::vector<double> mollify;
  double eta = 1e-3;
};

inline CommandOutput run_needle_check(const NeedleCheckArgs& a,
                                      std::uint64_t seed) {
  detail::check_tol(a.tol, "--tol");
  detail::check_tol(a.diff_tol, "--diff-tol");
  const CdParams params(a.K, detail::parse_dimension(a.N));
  const NeedleDensity rho = a.density.build();
  CommandOutput out;
  out.report = report_header("needle-check", seed);
  Json res;
  const CheckReport cd = check_cd_density(rho, params, a.trials, seed, a.tol);
  out.violations += cd.violations;
  res["cd_density"] = detail::check_json(cd);
  if (params.N().is_finite() && params.N().value() > 1.0) {
    const auto [lo, hi] = rho.cd_region();
    if (hi - lo > conjugate_radius(*params.kappa_eff()) * (1.0 + 1e-12)) {
      ++out.violations;
      res["mcp"] = Json{{"violations", 1},
                        {"reason", "support is longer than pi/sqrt(K/(N-1))"}};
    } else {
      const McpReport mcp =
          check_mcp_ratio(rho, params, a.mcp_trials, seed, a.tol);
      out.violations += mcp.violations;
      res["mcp"] = detail::mcp_json(mcp);
    }
  } else {
    res["mcp"] = Json{{"skipped", "needs finite N > 1"}};
  }
  try {
    const CheckReport df =
        check_differential_form(rho, params, a.diff_points, a.diff_tol);
    out.violations += df.violations;
    res["differential_form"] = detail::check_json(df);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kNonSmoothDensity) throw;
    res["differential_form"] = Json{{"skipped", "density is not smooth"}};
  }
  Json moll = Json::array();
  for (double eps : a.mollify) {
    const MollifyResult m = mollify(rho, params, eps);
    const CdParams relaxed(a.K - a.eta, params.N());
    const CheckReport df =
        check_differential_form(m.density, relaxed, a.diff_points, a.diff_tol);
    out.violations += df.violations;
    moll.push_back(Json{{"eps", eps},
                        {"mass", detail::num(m.mass)},
                        {"cd_region",
                         detail::nums({m.density.cd_region().first,
                                       m.density.cd_region().second})},
                        {"differential_form", detail::check_json(df)}});
  }
  res["mollified"] = std::move(moll);
  finish(out,
         Json{{"density", a.density.to_json()},
              {"K", a.K},
              {"N", detail::dimension_text(params.N())},
              {"trials", a.trials},
              {"mcp_trials", a.mcp_trials},
              {"diff_points", a.diff_points},
              {"tol", a.tol},
              {"diff_tol", a.diff_tol},
              {"mollify", detail::nums(a.mollify)},
              {"eta", a.eta}},
         std::move(res));
  return out;
}

// ---------------------------------------------------------------------------
// localize

struct LocalizeArgs {
  std::string input;
  std::string instance;
  std::size_t n = 0;
  bool metric_repair = false;
  std::optional<double> eps_tight;
  double gap_tol = 1e-9;
  double recon_tol = 1e-12;
  double residual_tol = 1e-7;
  double saturated_tol = 1e-8;
  std::size_t cyclical_subset = 4;
  std::string write_instance;
};

inline Json instance_json(const LocalizationInstance& inst) {
  const FiniteAsymSpace& s = inst.space;
  Json d = Json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < s.size(); ++j) row.push_back(s.d(i, j));
    d.push_back(std::move(row));
  }
  Json j;
  if (!s.coords().empty()) j["points"] = s.coords();
  j["d"] = std::move(d);
  j["m"] = s.weights();
  j["f"] = inst.f;
  return j;
}

inline LocalizationInstance instance_from_json(const Json& j, bool repair,
                                               const std::string& where) {
  const Json& dj = detail::field(j, "d", where);
  if (!dj.is_array()) throw Error(ErrorKind::kParseError, "d is not an array");
  std::vector<std::vector<double>> d;
  for (const auto& row : dj) d.push_back(detail::real_array(row, "d"));
  std::vector<double> m;
  if (j.contains("m")) {
    m = detail::real_array(j.at("m"), "m");
  } else {
    m.assign(d.size(), 1.0 / static_cast<double>(d.size()));
  }
  std::vector<double> f = detail::real_array(detail::field(j, "f", where), "f");
  std::vector<std::vector<double>> coords;
  if (j.contains("points")) {
    for (const auto& p : j.at("points")) {
      coords.push_back(p.is_array() ? detail::real_array(p, "points")
                                    : std::vector<double>{detail::as_real(p, "points")});
    }
  }
  if (f.size() != d.size()) {
    throw Error(ErrorKind::kInvalidArgument, "f and d disagree in size");
  }
  return {FiniteAsymSpace(std::move(d), std::move(m), repair, std::move(coords)),
          std::move(f)};
}

inline CommandOutput run_localize(const LocalizeArgs& a, std::uint64_t seed) {
  detail::check_tol(a.gap_tol, "--gap-tol");
  detail::check_tol(a.recon_tol, "--recon-tol");
  detail::check_tol(a.residual_tol, "--residual-tol");
  detail::check_tol(a.saturated_tol, "--saturated-tol");
  if (a.input.empty() == a.instance.empty()) {
    throw Error(ErrorKind::kInvalidArgument,
                "give exactly one of --input and --instance");
  }
  std::optional<LocalizationInstance> inst;
  std::size_t n = a.n;
  if (!a.input.empty()) {
    inst.emplace(instance_from_json(detail::read_json(a.input), a.metric_repair,
                                    a.input));
  } else if (a.instance == "abs-value") {
    if (n == 0) n = 201;
    inst.emplace(abs_value_instance(n));
  } else {
    if (n == 0) n = 50;
    inst.emplace(random_instance(n, seed));
  }
  const FiniteAsymSpace& space = inst->space;
  const std::vector<double>& f = inst->f;
  if (!a.write_instance.empty()) {
    detail::write_text(a.write_instance, instance_json(*inst).dump(2) + "\n");
  }
  const double eps = a.eps_tight.value_or(default_eps_tight(space));
  const PotentialSolution sol = solve_potential(space, f);
  const double gap = std::abs(sol.objective - sol.dual_objective) /
                     std::max(1.0, std::abs(sol.objective));
  const RayDecomposition dec = decompose(space, sol.phi, eps);
  const double recon = reconstruction_error(space, dec);
  const TightGraph g = tight_graph(space, sol.phi, eps);
  const PerRayReport pr = check_per_ray_mean_zero(space, f, dec);

  // Saturated components: closures of single points under tight pairs.
  std::vector<char> seen(space.size(), 0);
  std::size_t components = 0;
  double worst_component = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (seen[i]) continue;
    const auto comp = saturate(space, sol.phi, {i}, eps);
    for (std::size_t k : comp) seen[k] = 1;
    ++components;
    worst_component = std::max(
        worst_component, check_saturated_mean_zero(space, sol.phi, f, comp, eps));
  }

  CommandOutput out;
  out.report = report_header("localize", seed);
  Json checks;
  auto check = [&](const std::string& name, double value, double tol,
                   bool ok) {
    checks[name] = Json{{"value", detail::num(value)},
                        {"tolerance", tol},
                        {"ok", ok}};
    if (!ok) ++out.violations;
  };
  check("duality_gap", gap, a.gap_tol, gap <= a.gap_tol);
  check("reconstruction", recon, a.recon_tol, recon <= a.recon_tol);
  check("lipschitz", sol.max_lipschitz_violation, eps,
        sol.max_lipschitz_violation <= eps);
  check("per_ray_excess", pr.max_excess, a.residual_tol,
        pr.max_excess <= a.residual_tol);
  check("D_residual", pr.D_residual, a.residual_tol,
        pr.D_residual <= a.residual_tol);
  check("saturated_components", worst_component, a.saturated_tol,
        worst_component <= a.saturated_tol);
  Json cyc;
  if (a.cyclical_subset >= 2) {
    const CyclicalReport cr =
        check_cyclical_monotonicity(space, g.edges, 1, a.cyclical_subset);
    cyc = Json{{"edges", cr.edges},
               {"max_subset", a.cyclical_subset},
               {"power", 1},
               {"worst", detail::num(cr.worst)},
               {"monotone", cr.monotone}};
    if (!cr.monotone) ++out.violations;
  } else {
    cyc = Json{{"skipped", "max_subset < 2"}};
  }
  Json rays = Json::array();
  for (const Ray& r : dec.rays) {
    rays.push_back(Json{{"points", r.points},
                        {"param", detail::nums(r.param)},
                        {"v_weight", r.v_weight}});
  }
  Json res{{"n", space.size()},
           {"phi", detail::nums(sol.phi)},
           {"objective", sol.objective},
           {"dual_objective", sol.dual_objective},
           {"relative_gap", gap},
           {"augmentations", sol.augmentations},
           {"tight_pairs", g.edges.size()},
           {"rays", std::move(rays)},
           {"D", dec.D_set},
           {"T_count", dec.T_set.size()},
           {"B_plus", dec.B_plus},
           {"B_minus", dec.B_minus},
           {"B_mass", dec.B_mass},
           {"reconstruction_error", recon},
           {"per_ray",
            Json{{"max_ray_residual", pr.max_ray_residual},
                 {"max_b_bound", pr.max_b_bound},
                 {"max_excess", pr.max_excess},
                 {"worst_ray", pr.worst_ray},
                 {"D_residual", pr.D_residual}}},
           {"saturated", Json{{"components", components},
                              {"max_residual", worst_component}}},
           {"cyclical_monotonicity", std::move(cyc)},
           {"checks", std::move(checks)}};
  Json params{{"input", a.input},
              {"instance", a.instance},
              {"n", space.size()},
              {"metric_repair", a.metric_repair},
              {"eps_tight", eps},
              {"gap_tol", a.gap_tol},
              {"recon_tol", a.recon_tol},
              {"residual_tol", a.residual_tol},
              {"saturated_tol", a.saturated_tol},
              {"cyclical_subset", a.cyclical_subset}};
  finish(out, std::move(params), std::move(res));
  return out;
}

// ---------------------------------------------------------------------------
// isoperimetry

struct IsoArgs {
  std::string instance = "circle";
  std::vector<double> theta;
  double tol_grid = 0.02;
  // circle
  double D = 1.0;
  double Lambda = 2.0;
  std::size_t n = 0;
  // needle
  DensityArgs density;
  double backward_factor = 1.0;
  double K = 1.0;
  std::string N = "inf";
  std::string model_D = "inf";
  // randers
  double b1 = 0.3;
  double b2 = 0.0;
  double half_width = 4.0;
  int radius = 4;
  std::size_t half_spaces = 16;
  std::size_t potentials = 4;
  std::size_t coarse = 20;
};

inline Json main_report_json(const MainInequalityReport& r) {
  return Json{{"theta", detail::nums(r.theta)},
              {"estimate", detail::nums(r.estimate)},
              {"bound", detail::nums(r.bound)},
              {"margin", detail::nums(r.margin)},
              {"tol_grid", r.tol_grid},
              {"violations", r.violations},
              {"worst_margin", detail::num(r.worst_margin)}};
}

inline CommandOutput run_isoperimetry(const IsoArgs& a, std::uint64_t seed) {
  detail::check_tol(a.tol_grid, "--tol-grid");
  CommandOutput out;
  out.report = report_header("isoperimetry", seed);
  Json params{{"instance", a.instance}, {"tol_grid", a.tol_grid}};
  Json res;
  const IsoProfileOptions iso_opts;
  params["eps_steps"] = iso_opts.eps_steps;
  params["mass_tol"] = iso_opts.mass_tol;
  if (a.instance == "circle") {
    const std::vector<double> th =
        a.theta.empty() ? std::vector<double>{0.2, 0.5, 0.8} : a.theta;
    detail::check_theta(th);
    const std::size_t n = a.n == 0 ? 10000 : a.n;
    const CircleStructure cs(a.D, a.Lambda);
    const IsoProfile p = circle_profile(cs, n, th, iso_opts);
    const auto rep = verify_main_inequality(p.profile, circle_bound(cs, th),
                                            a.tol_grid);
    out.violations = rep.violations;
    params.update(Json{{"D", a.D}, {"Lambda", a.Lambda}, {"n", n},
                       {"theta", detail::nums(th)}});
    res = main_report_json(rep);
    res["method"] = p.profile.method;
    res["argmin"] = p.argmin;
    res["exact"] = circle_boundary_rate(cs);
  } else if (a.instance == "needle") {
    const std::vector<double> th =
        a.theta.empty() ? detail::default_theta_grid() : a.theta;
    detail::check_theta(th);
    const NeedleDensity rho = a.density.build();
    const AsymLine line(a.backward_factor);
    const CdParams params_cd(a.K, detail::parse_dimension(a.N));
    const ExtendedReal D = detail::parse_extended(a.model_D, "--model-D");
    const Profile p = needle_profile(rho, line, th);
    const double lam = line.reversibility();
    const auto rep = verify_main_inequality(
        p, main_bound(params_cd, D, lam, th), a.tol_grid);
    out.violations = rep.violations;
    params.update(Json{{"density", a.density.to_json()},
                       {"backward_factor", a.backward_factor},
                       {"K", a.K},
                       {"N", detail::dimension_text(params_cd.N())},
                       {"model_D", detail::extended_json(D)},
                       {"theta", detail::nums(th)}});
    res = main_report_json(rep);
    res["method"] = p.method;
    res["Lambda"] = lam;
  } else {
    const std::vector<double> th =
        a.theta.empty() ? std::vector<double>{0.25, 0.5, 0.75} : a.theta;
    detail::check_theta(th);
    const std::size_t n = a.n == 0 ? 300 : a.n;
    const RandersGaussianPlane plane =
        randers_gaussian_plane({a.b1, a.b2}, a.K, n, a.half_width, a.radius);
    CandidateOptions copts;
    copts.half_spaces = a.half_spaces;
    copts.potentials = a.potentials;
    copts.coarse = a.coarse;
    const auto cands = plane_candidates(plane.grid, plane.norm, copts);
    const IsoProfile p = estimate_profile(plane.grid, cands, th, iso_opts);
    const auto bound =
        main_bound(CdParams(plane.K_prime, Dimension::infinity()),
                   ExtendedReal::positive_infinity(), plane.Lambda, th);
    const auto rep = verify_main_inequality(p.profile, bound, a.tol_grid);
    out.violations = rep.violations;
    Json centers = Json::array();
    for (const auto& [x, y] : copts.ball_centers) centers.push_back({x, y});
    params.update(Json{{"b", {a.b1, a.b2}},
                       {"K", a.K},
                       {"n", n},
                       {"half_width", a.half_width},
                       {"radius", a.radius},
                       {"half_spaces", a.half_spaces},
                       {"ball_centers", std::move(centers)},
                       {"potentials", a.potentials},
                       {"coarse", a.coarse},
                       {"theta", detail::nums(th)}});
    res = main_report_json(rep);
    res["method"] = p.profile.method;
    res["argmin"] = p.argmin;
    res["Lambda"] = plane.Lambda;
    res["K_prime"] = plane.K_prime;
    res["candidates"] = p.candidates;
    res["caveat"] =
        "candidate minima bound the profile from above; half-line minimizers "
        "are not known to exist in general";
  }
  finish(out, std::move(params), std::move(res));
  return out;
}

// ---------------------------------------------------------------------------
// bm-check

struct BmArgs {
  std::string measure = "lebesgue";
  double K = 0.0;
  std::string A0 = "0,1";
  std::string A1 = "3,4";
  std::vector<double> lambdas;
  double tol = 1e-9;
  std::size_t n = 500;
  double backward_factor = 1.0;
};

inline CommandOutput run_bm_check(const BmArgs& a, std::uint64_t seed) {
  std::vector<double> lambdas = a.lambdas;
  if (lambdas.empty()) {
    for (int k = 1; k < 20; ++k) lambdas.push_back(k / 20.0);
  }
  const auto A0 = detail::parse_pair(a.A0, "--A0");
  const auto A1 = detail::parse_pair(a.A1, "--A1");
  BmReport rep;
  Json params{{"measure", a.measure}, {"K", a.K}, {"A0", {A0.first, A0.second}},
              {"A1", {A1.first, A1.second}}, {"lambdas", detail::nums(lambdas)}};
  if (a.measure == "discrete") {
    if (a.n < 2) throw Error(ErrorKind::kInvalidArgument, "--n must be >= 2");
    std::vector<std::vector<double>> d(a.n, std::vector<double>(a.n, 0.0));
    const double h = 1.0 / static_cast<double>(a.n - 1);
    for (std::size_t i = 0; i < a.n; ++i) {
      for (std::size_t j = 0; j < a.n; ++j) {
        const double gap = h * (static_cast<double>(j) - static_cast<double>(i));
        d[i][j] = gap >= 0.0 ? gap : -a.backward_factor * gap;
      }
    }
    const FiniteAsymSpace space(
        std::move(d), std::vector<double>(a.n, 1.0 / static_cast<double>(a.n)));
    auto range = [&](std::pair<double, double> r) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < a.n; ++i) {
        const double x = h * static_cast<double>(i);
        if (x >= r.first - 1e-12 && x <= r.second + 1e-12) idx.push_back(i);
      }
      if (idx.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "set has no grid points");
      }
      return idx;
    };
    rep = check_brunn_minkowski_discrete(space, a.K, range(A0), range(A1),
                                         lambdas);
    params["n"] = a.n;
    params["backward_factor"] = a.backward_factor;
  } else {
    detail::check_tol(a.tol, "--tol");
    std::function<double(double, double)> m;
    if (a.measure == "lebesgue") {
      m = [](double x, double y) { return y - x; };
    } else if (a.measure == "exp") {
      m = [](double x, double y) { return std::exp(y) - std::exp(x); };
    } else {
      m = [](double x, double y) {
        return numerics::normal_cdf(y) - numerics::normal_cdf(x);
      };
    }
    rep = check_brunn_minkowski_1d(m, a.K, A0, A1, lambdas, a.tol);
  }
  params["tol"] = rep.tolerance;
  CommandOutput out;
  out.report = report_header("bm-check", seed);
  out.violations = rep.violations;
  Json pts = Json::array();
  for (const BmPoint& p : rep.points) {
    pts.push_back(Json{{"lambda", p.lambda},
                       {"lhs", detail::num(p.lhs)},
                       {"rhs", detail::num(p.rhs)},
                       {"margin", detail::num(p.margin)}});
  }
  finish(out, std::move(params),
         Json{{"points", std::move(pts)}, {"violations", rep.violations}});
  return out;
}

// ---------------------------------------------------------------------------
// norm-info

struct NormArgs {
  std::string form = "randers";
  std::string A;
  std::string b = "0.3,0";
  std::string vertices;
  std::string values;
  std::optional<double> smooth_eps;
};

inline AsymmetricNorm build_norm(const NormArgs& a) {
  Mat A;
  if (!a.A.empty()) {
    const auto flat = detail::parse_list(a.A, "--A");
    const auto dim = static_cast<std::size_t>(
        std::llround(std::sqrt(static_cast<double>(flat.size()))));
    if (dim * dim != flat.size()) {
      throw Error(ErrorKind::kParseError, "--A needs a square matrix");
    }
    A.assign(dim, Vec(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) A[i][j] = flat[i * dim + j];
    }
  }
  if (a.form == "euclidean" || a.form == "randers") {
    if (A.empty()) {
      const std::size_t dim =
          a.form == "randers" ? detail::parse_list(a.b, "--b").size() : 2;
      A.assign(dim, Vec(dim, 0.0));
      for (std::size_t i = 0; i < dim; ++i) A[i][i] = 1.0;
    }
    if (a.form == "euclidean") return AsymmetricNorm::euclidean(A);
    return AsymmetricNorm::randers(A, detail::parse_list(a.b, "--b"));
  }
  if (a.form == "table") {
    return AsymmetricNorm::table(detail::parse_list(a.values, "--values"));
  }
  std::vector<std::pair<double, double>> verts;
  std::stringstream ss(a.vertices);
  std::string item;
  while (std::getline(ss, item, ';')) {
    verts.push_back(detail::parse_pair(item, "--vertices"));
  }
  return AsymmetricNorm::polygon(std::move(verts));
}

inline CommandOutput run_norm_info(const NormArgs& a, std::uint64_t seed) {
  const AsymmetricNorm norm = build_norm(a);
  CommandOutput out;
  out.report = report_header("norm-info", seed);
  const double top = max_unit_norm(norm);
  Json res{{"dim", norm.dim()},
           {"Lambda", reversibility_constant(norm)},
           {"max_unit_norm", top},
           {"quadratic_transfer", 1.0 / (top * top)},
           {"strong_convexity_probe", strong_convexity_probe(norm)}};
  if (a.smooth_eps) {
    const SmoothNormResult s = smooth_norm(norm, *a.smooth_eps);
    res["smoothed"] = Json{{"eps", *a.smooth_eps},
                           {"delta", s.delta},
                           {"max_ratio", s.max_ratio},
                           {"min_ratio", s.min_ratio},
                           {"sweep", s.sweep},
                           {"Lambda", s.lambda}};
  }
  Json params{{"form", a.form}};
  if (!a.A.empty()) params["A"] = a.A;
  if (a.form == "randers") params["b"] = a.b;
  if (a.form == "polygon") params["vertices"] = a.vertices;
  if (a.form == "table") params["values"] = a.values;
  if (a.smooth_eps) params["smooth_eps"] = *a.smooth_eps;
  finish(out, std::move(params), std::move(res));
  return out;
}

// ---------------------------------------------------------------------------
// plot-data

/// CSV rows (theta, I_est, Lambda_inv_model, margin) from an isoperimetry
/// report.
inline std::string plot_data_csv(const Json& report) {
  const Json& res = detail::field(report, "results", "report");
  const auto th = detail::real_array(detail::field(res, "theta", "results"), "theta");
  const auto est =
      detail::real_array(detail::field(res, "estimate", "results"), "estimate");
  const auto bound =
      detail::real_array(detail::field(res, "bound", "results"), "bound");
  const auto margin =
      detail::real_array(detail::field(res, "margin", "results"), "margin");
  if (est.size() != th.size() || bound.size() != th.size() ||
      margin.size() != th.size()) {
    throw Error(ErrorKind::kParseError, "report columns disagree in length");
  }
  std::string csv = "theta,I_est,Lambda_inv_model,margin\n";
  for (std::size_t i = 0; i < th.size(); ++i) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", th[i], est[i],
                  bound[i], margin[i]);
    csv += buf;
  }
  return csv;
}

// ---------------------------------------------------------------------------
// Entry point.

inline bool input_error(ErrorKind k) {
  switch (k) {
    case ErrorKind::kParseError:
    case ErrorKind::kMissingField:
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kBadDimension:
    case ErrorKind::kNotANorm:
    case ErrorKind::kInvalidSpace:
    case ErrorKind::kNotMeanZero:
    case ErrorKind::kDomainExceeded:
      return true;
    default:
      return false;
  }
}

inline int emit_error(std::ostream& err, const std::string& kind,
                      const std::string& message, int code) {
  const Json j{{"tool", "needle"},
               {"version", std::string(kVersion)},
               {"error", Json{{"kind", kind}, {"message", message}}},
               {"exit_code", code}};
  err << j.dump(2) << '\n';
  return code;
}

/// Parses argv, runs one command and returns the exit status: 0 when the
/// report shows no violations, 1 on violations or a failed computation, 2
/// on unusable input. Errors are written to err as JSON.
inline int run(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Needle decompositions and isoperimetry on asymmetric spaces",
               "needle_cli"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  std::uint64_t seed = kDefaultSeed;
  std::string output;
  app.add_option("--seed", seed, "random seed")->capture_default_str();
  app.add_option("-o,--output", output, "write the report (or CSV) here");

  std::function<CommandOutput()> action;
  bool plot = false;
  std::string plot_input;

  ProfileArgs pa;
  auto* prof = app.add_subcommand("profile", "model isoperimetric profile");
  prof->add_option("--K", pa.K, "curvature bound")->required();
  prof->add_option("--N", pa.N, "effective dimension (real or inf)")->required();
  prof->add_option("--D", pa.D, "diameter bound (real, pi or inf)")
      ->capture_default_str();
  prof->add_option("--theta", pa.theta, "mass levels")->delimiter(',');
  prof->add_option("--method", pa.method, "auto | numerical | levy-gromov | bakry-ledoux")
      ->check(CLI::IsMember({"auto", "numerical", "levy-gromov", "bakry-ledoux"}))
      ->capture_default_str();
  prof->add_flag("--json", pa.json, "print the JSON report instead of values");
  prof->callback([&] { action = [&] { return run_profile(pa, seed); }; });

  NeedleCheckArgs na;
  auto* nc = app.add_subcommand("needle-check", "CD/MCP checks of a needle density");
  na.density.add_to(nc);
  nc->add_option("--K", na.K, "curvature bound")->required();
  nc->add_option("--N", na.N, "effective dimension (real or inf)")->required();
  nc->add_option("--trials", na.trials, "sampled triples")->capture_default_str();
  nc->add_option("--mcp-trials", na.mcp_trials, "sampled pairs")->capture_default_str();
  nc->add_option("--diff-points", na.diff_points, "grid points")->capture_default_str();
  nc->add_option("--tol", na.tol, "sampled-check tolerance")->capture_default_str();
  nc->add_option("--diff-tol", na.diff_tol, "differential-form tolerance")
      ->capture_default_str();
  nc->add_option("--mollify", na.mollify, "mollifier scales")->delimiter(',');
  nc->add_option("--eta", na.eta, "K relaxation after mollifying")
      ->capture_default_str();
  nc->callback([&] { action = [&] { return run_needle_check(na, seed); }; });

  LocalizeArgs la;
  double eps_tight = 0.0;
  auto* loc = app.add_subcommand("localize", "transport rays of a finite instance");
  auto* in_opt = loc->add_option("--input", la.input, "instance JSON");
  loc->add_option("--instance", la.instance, "abs-value | random")
      ->check(CLI::IsMember({"abs-value", "random"}))
      ->excludes(in_opt);
  loc->add_option("--n", la.n, "points of a built-in instance");
  loc->add_flag("--metric-repair", la.metric_repair,
                "close d under shortest paths instead of rejecting it");
  auto* eps_opt = loc->add_option("--eps-tight", eps_tight, "tightness tolerance");
  loc->add_option("--gap-tol", la.gap_tol, "relative duality gap")->capture_default_str();
  loc->add_option("--recon-tol", la.recon_tol, "reconstruction")->capture_default_str();
  loc->add_option("--residual-tol", la.residual_tol, "per-ray and D residuals")
      ->capture_default_str();
  loc->add_option("--saturated-tol", la.saturated_tol, "saturated components")
      ->capture_default_str();
  loc->add_option("--cyclical-subset", la.cyclical_subset,
                  "largest arrangement checked (0 skips)")
      ->capture_default_str();
  loc->add_option("--write-instance", la.write_instance,
                  "also write the instance JSON here");
  loc->callback([&] {
    if (*eps_opt) la.eps_tight = eps_tight;
    action = [&] { return run_localize(la, seed); };
  });

  IsoArgs ia;
  auto* iso = app.add_subcommand("isoperimetry", "profile estimate against the bound");
  iso->add_option("--instance", ia.instance, "circle | needle | randers")
      ->check(CLI::IsMember({"circle", "needle", "randers"}))
      ->capture_default_str();
  iso->add_option("--theta", ia.theta, "mass levels")->delimiter(',');
  iso->add_option("--tol-grid", ia.tol_grid, "allowed negative margin")
      ->capture_default_str();
  iso->add_option("--D", ia.D, "circle length")->capture_default_str();
  iso->add_option("--Lambda", ia.Lambda, "circle reversibility")->capture_default_str();
  iso->add_option("--n", ia.n, "grid size (circle cells or plane side)");
  ia.density.add_to(iso);
  iso->add_option("--backward-factor", ia.backward_factor, "needle line asymmetry")
      ->capture_default_str();
  iso->add_option("--K", ia.K, "model K (needle) or Gaussian weight (randers)")
      ->capture_default_str();
  iso->add_option("--N", ia.N, "model N (needle)")->capture_default_str();
  iso->add_option("--model-D", ia.model_D, "model diameter (needle)")
      ->capture_default_str();
  iso->add_option("--b1", ia.b1, "Randers drift x")->capture_default_str();
  iso->add_option("--b2", ia.b2, "Randers drift y")->capture_default_str();
  iso->add_option("--half-width", ia.half_width, "plane half width")
      ->capture_default_str();
  iso->add_option("--radius", ia.radius, "stencil radius")->capture_default_str();
  iso->add_option("--half-spaces", ia.half_spaces, "half-space candidates")
      ->capture_default_str();
  iso->add_option("--potentials", ia.potentials, "potential candidates")
      ->capture_default_str();
  iso->add_option("--coarse", ia.coarse, "potential subgrid side")
      ->capture_default_str();
  iso->callback([&] { action = [&] { return run_isoperimetry(ia, seed); }; });

  BmArgs ba;
  auto* bm = app.add_subcommand("bm-check", "Brunn-Minkowski inequality");
  bm->add_option("--measure", ba.measure, "lebesgue | exp | gaussian | discrete")
      ->check(CLI::IsMember({"lebesgue", "exp", "gaussian", "discrete"}))
      ->capture_default_str();
  bm->add_option("--K", ba.K, "curvature bound")->capture_default_str();
  bm->add_option("--A0", ba.A0, "first interval a,b")->capture_default_str();
  bm->add_option("--A1", ba.A1, "second interval a,b")->capture_default_str();
  bm->add_option("--lambda", ba.lambdas, "interpolation parameters")->delimiter(',');
  bm->add_option("--tol", ba.tol, "tolerance (1D)")->capture_default_str();
  bm->add_option("--n", ba.n, "points of the discrete line on [0, 1]")
      ->capture_default_str();
  bm->add_option("--backward-factor", ba.backward_factor, "discrete line asymmetry")
      ->capture_default_str();
  bm->callback([&] { action = [&] { return run_bm_check(ba, seed); }; });

  NormArgs oa;
  double smooth_eps = 0.0;
  auto* ni = app.add_subcommand("norm-info", "constants of an asymmetric norm");
  ni->add_option("--form", oa.form, "randers | euclidean | polygon | table")
      ->check(CLI::IsMember({"randers", "euclidean", "polygon", "table"}))
      ->capture_default_str();
  ni->add_option("--A", oa.A, "row-major matrix entries");
  ni->add_option("--b", oa.b, "Randers drift")->capture_default_str();
  ni->add_option("--vertices", oa.vertices, "polygon x,y;x,y;...");
  ni->add_option("--values", oa.values, "norm at equally spaced directions");
  auto* smooth_opt = ni->add_option("--smooth-eps", smooth_eps, "smoothing sandwich");
  ni->callback([&] {
    if (*smooth_opt) oa.smooth_eps = smooth_eps;
    action = [&] { return run_norm_info(oa, seed); };
  });

  auto* pd = app.add_subcommand("plot-data", "CSV columns from an isoperimetry report");
  pd->add_option("--input", plot_input, "report JSON")->required();
  pd->callback([&] { plot = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    return emit_error(err, "ParseError", e.what(), 2);
  }
  try {
    if (plot) {
      const std::string csv = plot_data_csv(detail::read_json(plot_input));
      if (output.empty()) {
        out << csv;
      } else {
        detail::write_text(output, csv);
      }
      return 0;
    }
    const CommandOutput res = action();
    const std::string text = res.report.dump(2) + "\n";
    if (!output.empty()) detail::write_text(output, text);
    if (!res.stdout_text.empty()) {
      out << res.stdout_text;
    } else if (output.empty()) {
      out << text;
    }
    return res.violations == 0 ? 0 : 1;
  } catch (const Error& e) {
    const int code = input_error(e.kind()) ? 2 : 1;
    return emit_error(err, std::string(to_string(e.kind())), e.what(), code);
  } catch (const std::exception& e) {
    return emit_error(err, "Internal", e.what(), 1);
  }
}

}  // namespace needle::cli
