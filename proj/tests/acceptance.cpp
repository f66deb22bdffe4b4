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

// Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "needle/instances.hpp"
#include "needle/isoperimetry.hpp"
#include "needle/localization.hpp"
#include "needle/model_profiles.hpp"
#include "needle/needle1d.hpp"

namespace needle {
namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

CdParams P(double K, double N) { return CdParams(K, Dimension::finite(N)); }
CdParams Pinf(double K) { return CdParams(K, Dimension::infinity()); }

std::vector<std::size_t> range(std::size_t a, std::size_t b) {
  std::vector<std::size_t> v(b - a);
  std::iota(v.begin(), v.end(), a);
  return v;
}

std::vector<double> theta21() {
  std::vector<double> th;
  for (int k = 0; k <= 20; ++k) th.push_back(0.025 + 0.0475 * k);
  return th;
}

// Composite Simpson on [a, b] with n (even) panels.
double simpson(const std::function<double(double)>& f, double a, double b,
               int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

void circle_formula(Outcome& o) {
  const std::vector<double> th = {0.2, 0.5, 0.8};
  double worst = 0.0;
  for (auto [D, L] : {std::pair{1.0, 1.0}, {1.0, 2.0}, {2.0, 3.0}}) {
    const CircleStructure cs(D, L);
    const auto p = circle_profile(cs, 10000, th);
    const double exact = (1.0 + L) / D;
    for (double v : p.profile.value) {
      worst = std::max(worst, std::abs(v - exact) / exact);
    }
    const auto conv = circle_convergence(cs, 0.3, {1250, 2500, 5000, 10000});
    o.require(std::abs(conv.slope - 1.0) <= 0.15, "first-order slope");
    o.require(std::is_sorted(conv.error.rbegin(), conv.error.rend()),
              "errors decrease under refinement");
    o.detail << "slope(" << D << "," << L << ")=" << conv.slope << " ";
  }
  o.require(worst <= 0.02, "relative error <= 2%");
  o.detail << "max rel err " << worst;
}

void classical_profiles(Outcome& o) {
  // Sin-squared density on [0, pi]: half mass at R, I = sin^2(R) / Z.
  const auto s2 = [](double t) { return std::sin(t) * std::sin(t); };
  const double Z = simpson(s2, 0.0, kPi, 4000);
  double lo = 0.0;
  double hi = kPi;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (simpson(s2, 0.0, mid, 4000) / Z < 0.5 ? lo : hi) = mid;
  }
  const double quad = s2(0.5 * (lo + hi)) / Z;
  const double lg = levy_gromov_profile(2.0, 3.0, 0.5);
  o.require(std::abs(lg - quad) <= 1e-8, "levy-gromov vs quadrature");
  o.require(std::abs(lg - 2.0 / kPi) <= 1e-8, "levy-gromov = 2/pi");
  for (double K : {1.0, 4.0}) {
    const double bl = bakry_ledoux_profile(K, 0.5);
    o.require(bl == std::sqrt(K / (2.0 * kPi)), "bakry-ledoux exact");
  }
  const auto th = theta21();
  const auto num_lg = numerical_model_profile(
      {P(2.0, 3.0), ExtendedReal::finite(kPi), th});
  const auto num_bl = numerical_model_profile(
      {Pinf(1.0), ExtendedReal::positive_infinity(), th});
  double worst = 0.0;
  for (std::size_t i = 0; i < th.size(); ++i) {
    worst = std::max(worst, std::abs(num_lg.value[i] -
                                     levy_gromov_profile(2.0, 3.0, th[i])));
    worst = std::max(worst, std::abs(num_bl.value[i] -
                                     bakry_ledoux_profile(1.0, th[i])));
  }
  o.require(worst <= 1e-6, "numerical vs closed forms");
  o.detail << "|LG-quad| " << std::abs(lg - quad) << ", cross-val " << worst;
}

void cd_equality(Outcome& o) {
  double worst = 0.0;
  auto eq = [&](const NeedleDensity& rho, const CdParams& p,
                const std::string& name) {
    const auto r = check_cd_density(rho, p, 10000);
    o.require(r.violations == 0, name + " violations");
    o.require(r.max_abs_margin <= 1e-8, name + " margin");
    worst = std::max(worst, r.max_abs_margin);
  };
  const auto u = NeedleDensity::uniform(0.0, 1.0);
  for (Dimension N : {Dimension::finite(-2.0), Dimension::finite(0.0),
                      Dimension::finite(3.0), Dimension::infinity()}) {
    eq(u, CdParams(0.0, N), "uniform N=" + N.to_string());
  }
  eq(NeedleDensity::gaussian(1.0), Pinf(1.0), "gaussian");
  eq(NeedleDensity::sin_power(2.0, 3.0), P(2.0, 3.0), "sin^2");
  const auto flip =
      check_cd_density(NeedleDensity::sin_power(2.0, 3.0), P(2.5, 3.0), 10000);
  o.require(flip.violations > 0, "K=2.5 flip reports violations");
  o.detail << "max |margin| " << worst << ", flip violations "
           << flip.violations;
}

void mcp_ratio(Outcome& o) {
  const auto r = check_mcp_ratio(NeedleDensity::sin_power(2.0, 3.0),
                                 P(2.0, 3.0), 1000, kDefaultSeed, 1e-9,
                                 std::pair{0.0, kPi});
  const double gap = std::max({std::abs(r.min_lower_gap),
                               std::abs(r.max_lower_gap),
                               std::abs(r.min_upper_gap),
                               std::abs(r.max_upper_gap)});
  o.require(r.violations == 0, "violations");
  o.require(gap <= 1e-8, "equality within 1e-8");
  o.require(r.trials >= 1000, "1000 quadruples");
  o.detail << "trials " << r.trials << ", max |log gap| " << gap;
}

void mollifier(Outcome& o) {
  const double eta = 1e-3;
  struct Case {
    NeedleDensity rho;
    CdParams params;
    std::string name;
  };
  std::vector<Case> cases;
  const auto u = NeedleDensity::uniform(0.0, 1.0);
  for (Dimension N : {Dimension::finite(-2.0), Dimension::finite(0.0),
                      Dimension::finite(3.0), Dimension::infinity()}) {
    cases.push_back({u, CdParams(0.0, N), "uniform N=" + N.to_string()});
  }
  cases.push_back({NeedleDensity::gaussian(1.0), Pinf(1.0), "gaussian"});
  cases.push_back({NeedleDensity::sin_power(2.0, 3.0), P(2.0, 3.0), "sin^2"});
  std::size_t checks = 0;
  for (const auto& c : cases) {
    for (double eps : {0.05, 0.01}) {
      const auto m = mollify(c.rho, c.params, eps);
      const auto r = check_differential_form(
          m.density, CdParams(c.params.K() - eta, c.params.N()));
      o.require(r.violations == 0,
                c.name + " eps=" + std::to_string(eps));
      o.require(std::abs(m.density.quadrature_mass() - 1.0) <= 1e-9,
                c.name + " renormalized");
      ++checks;
    }
  }
  o.detail << checks << " smoothed densities";
}

void localization_structure(Outcome& o) {
  const auto inst = abs_value_instance(201);
  const auto sol = solve_potential(inst.space, inst.f);
  const double eps = default_eps_tight(inst.space);
  const auto dec = decompose(inst.space, sol.phi, eps);
  o.require(dec.rays.size() == 2, "two rays");
  o.require(dec.B_plus == std::vector<std::size_t>{100}, "B+ = {0}");
  o.require(dec.D_set.empty(), "D empty");
  const double recon = reconstruction_error(inst.space, dec);
  o.require(recon <= 1e-12, "reconstruction");
  const auto g = tight_graph(inst.space, sol.phi, eps);
  const auto cyc = check_cyclical_monotonicity(inst.space, g.edges, 1, 4);
  o.require(cyc.monotone, "d-cyclical monotonicity");
  const double gap = std::abs(sol.objective - sol.dual_objective) /
                     std::max(1.0, std::abs(sol.objective));
  o.require(gap <= 1e-9, "duality gap");
  o.detail << "rays " << dec.rays.size() << ", recon " << recon
           << ", tight pairs " << g.edges.size() << ", gap " << gap;
}

void mean_zero(Outcome& o) {
  double ray = 0.0;
  double D = 0.0;
  double sat = 0.0;
  double excess = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto inst = random_instance(50, seed);
    const auto sol = solve_potential(inst.space, inst.f);
    const double eps = default_eps_tight(inst.space);
    const auto dec = decompose(inst.space, sol.phi, eps);
    const auto pr = check_per_ray_mean_zero(inst.space, inst.f, dec);
    ray = std::max(ray, pr.max_ray_residual);
    D = std::max(D, pr.D_residual);
    excess = std::max(excess, pr.max_excess);
    std::vector<char> seen(inst.space.size(), 0);
    for (std::size_t i = 0; i < inst.space.size(); ++i) {
      if (seen[i]) continue;
      const auto comp = saturate(inst.space, sol.phi, {i}, eps);
      for (std::size_t k : comp) seen[k] = 1;
      sat = std::max(sat, check_saturated_mean_zero(inst.space, sol.phi,
                                                    inst.f, comp, eps));
    }
  }
  o.require(ray <= 1e-7, "per-ray residual <= 1e-7");
  o.require(D <= 1e-7, "D residual <= 1e-7");
  o.require(sat <= 1e-8, "saturated integrals <= 1e-8");
  o.detail << "max per-ray " << ray << " (excess over branch-point bound "
           << excess << "), D " << D << ", saturated " << sat;
}

void phi_delta_exactness(Outcome& o) {
  std::mt19937_64 rng(kDefaultSeed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t instances = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = random_instance(40, seed);
    const auto sol = solve_potential(inst.space, inst.f);
    const double eps = default_eps_tight(inst.space);
    const std::size_t n = inst.space.size();
    std::vector<std::size_t> Z;
    for (std::size_t i = 0; i < n; ++i) {
      if (u(rng) < 0.2) Z.push_back(i);
    }
    if (Z.empty()) Z.push_back(seed % n);
    const double delta = 0.5 * u(rng) + 1e-3;
    const auto pd = phi_delta(inst.space, sol.phi, Z, delta);
    bool sandwich = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = sol.phi[i] - pd.values[i];
      sandwich = sandwich && diff >= 0.0 && diff <= delta;
    }
    o.require(sandwich, "0 <= phi - phi_delta <= delta");
    const auto ind = limit_indicator(inst.space, sol.phi, Z);
    const auto S = saturate(inst.space, sol.phi, Z, eps);
    bool exact = true;
    for (std::size_t z : Z) exact = exact && ind[z] == 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::binary_search(S.begin(), S.end(), i)) {
        exact = exact && ind[i] == 0.0;
      }
    }
    o.require(exact, "limit indicator exact");
    ++instances;
  }
  o.detail << instances << " instances";
}

void randers_plane(Outcome& o) {
  const RandersGaussianPlane plane = randers_gaussian_plane({0.3, 0.0}, 1.0,
                                                            300);
  const std::vector<double> th = {0.25, 0.5, 0.75};
  const auto cands = plane_candidates(plane.grid, plane.norm, {});
  const IsoProfile p = estimate_profile(plane.grid, cands, th);
  const auto bound = main_bound(CdParams(plane.K_prime, Dimension::infinity()),
                                ExtendedReal::positive_infinity(), plane.Lambda,
                                th);
  const auto rep = verify_main_inequality(p.profile, bound, 0.02);
  o.require(std::abs(plane.Lambda - 1.857) <= 1e-3, "Lambda ~ 1.857");
  o.require(rep.violations == 0, "margin >= -0.02");
  o.detail << "Lambda " << plane.Lambda << ", K' " << plane.K_prime
           << ", worst margin " << rep.worst_margin << ", candidates "
           << cands.size();
}

void entropy_convexity(Outcome& o) {
  const auto g = check_entropy_convexity(
      NeedleDensity::gaussian(1.0, -1.0), NeedleDensity::gaussian(1.0, 1.5),
      Pinf(1.0), {0.1, 0.3, 0.5, 0.7, 0.9},
      [](double x) { return 0.5 * x * x; });
  o.require(g.violations == 0 && g.tolerance == 1e-6, "gaussian reference");
  const auto s = check_entropy_convexity(
      NeedleDensity::uniform(0.0, 1.0), NeedleDensity::uniform(2.0, 3.0),
      P(0.0, 0.0), {0.2, 0.5, 0.8}, [](double) { return 0.0; });
  o.require(s.violations == 0 && s.tolerance == 1e-6, "ess-sup branch");
  double ess = 0.0;
  for (const auto& pt : s.points) ess = std::max(ess, std::abs(pt.lhs - 1.0));
  o.require(ess <= 1e-6, "ess-sup = 1");
  o.detail << "points " << g.points.size() + s.points.size()
           << ", |ess-sup - 1| " << ess;
}

void brunn_minkowski(Outcome& o) {
  const auto leb = [](double a, double b) { return b - a; };
  const auto em = [](double a, double b) { return std::exp(b) - std::exp(a); };
  std::vector<double> lambdas;
  for (int k = 1; k < 20; ++k) lambdas.push_back(k / 20.0);
  const auto eq = check_brunn_minkowski_1d(leb, 0.0, {0, 1}, {3, 4}, lambdas);
  double eq_gap = 0.0;
  for (const auto& pt : eq.points) {
    eq_gap = std::max(eq_gap, std::abs(pt.lhs - pt.rhs));
  }
  o.require(eq.violations == 0 && eq_gap <= 1e-9, "Lebesgue equality");
  for (double K : {1.0, 0.0, -1.0}) {
    const auto r = check_brunn_minkowski_1d(em, K, {0.0, 0.5}, {1.2, 2.0},
                                            lambdas);
    o.require(r.violations == 0 && r.tolerance == 1e-9,
              "exponential K=" + std::to_string(K));
  }
  const std::size_t n = 500;
  std::vector<double> x(n);
  std::vector<double> m(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 2.5 * static_cast<double>(i) / static_cast<double>(n - 1);
    m[i] = std::exp(x[i]);
    total += m[i];
  }
  for (double& w : m) w /= total;
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d[i][j] = std::abs(x[i] - x[j]);
  }
  const FiniteAsymSpace s(d, m);
  for (double K : {1.0, -1.0}) {
    const auto r = check_brunn_minkowski_discrete(
        s, K, range(0, 100), range(350, 480), {0.25, 0.5, 0.75});
    o.require(r.violations == 0, "discrete K=" + std::to_string(K));
  }
  o.detail << "equality gap " << eq_gap << ", cell mass " << m.back();
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0 for no runtime limit
  void (*run)(Outcome&);
};

}  // namespace
}  // namespace needle

int main() {
  using needle::Criterion;
  const Criterion criteria[] = {
      {1, "circle formula", 10.0, needle::circle_formula},
      {2, "classical profiles", 5.0, needle::classical_profiles},
      {3, "needle CD equality cases", 5.0, needle::cd_equality},
      {4, "MCP ratio equality", 0.0, needle::mcp_ratio},
      {5, "mollifier preservation", 10.0, needle::mollifier},
      {6, "localization structure", 5.0, needle::localization_structure},
      {7, "mean-zero on rays, D and saturated sets", 60.0, needle::mean_zero},
      {8, "phi_delta and limit indicator exactness", 0.0,
       needle::phi_delta_exactness},
      {9, "Randers plane end to end", 300.0, needle::randers_plane},
      {10, "entropy displacement convexity", 0.0, needle::entropy_convexity},
      {11, "Brunn-Minkowski CD(K,0)", 0.0, needle::brunn_minkowski},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    needle::Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail << "[exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    if (c.limit_s > 0.0 && secs > c.limit_s) {
      o.ok = false;
      o.detail << " [failed: runtime over " << c.limit_s << " s]";
    }
    if (!o.ok) ++failed;
    std::printf("%s criterion %d (%s): %s (%.2f s)\n", o.ok ? "PASS" : "FAIL",
                c.id, c.name, o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of 11 criteria passed\n", 11 - failed);
  return failed == 0 ? 0 : 1;
}
