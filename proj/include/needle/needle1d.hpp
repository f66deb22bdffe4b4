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

// One-dimensional needles: curvature-dimension and MCP density
// inequalities, the differential criterion, mollifier smoothing, monotone
// transport between densities, entropy convexity, and isoperimetry on an
// asymmetric line.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "needle/comparison.hpp"
#include "needle/core.hpp"
#include "needle/density.hpp"
#include "needle/numerics.hpp"

namespace needle {

inline constexpr std::uint64_t kDefaultSeed = 20260417;

struct CheckReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  std::size_t vacuous = 0;     // triples whose right-hand side is infinite
  double worst_margin = 0.0;   // most negative margin seen
  double max_abs_margin = 0.0;
  std::uint64_t seed = kDefaultSeed;
  double tolerance = 0.0;
};

namespace detail {

inline double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

inline void record(CheckReport& r, double margin, bool first) {
  if (first) {
    r.worst_margin = margin;
  } else {
    r.worst_margin = std::min(r.worst_margin, margin);
  }
  r.max_abs_margin = std::max(r.max_abs_margin, std::abs(margin));
  if (margin < -r.tolerance) ++r.violations;
}

}  // namespace detail

/// Log-margin log rho((1-l)s + l t) - log(RHS) of the sharp density bound
/// for the given (K, N); nullopt when the right-hand side is infinite.
inline std::optional<double> cd_density_margin(const NeedleDensity& rho,
                                               const CdParams& params,
                                               double s, double t,
                                               double lambda) {
  const double ls = rho.log_unnormalized(s);
  const double lt = rho.log_unnormalized(t);
  const double lm = rho.log_unnormalized((1.0 - lambda) * s + lambda * t);
  if (params.N().is_infinite()) {
    const double rhs = (1.0 - lambda) * ls + lambda * lt +
                       0.5 * params.K() * lambda * (1.0 - lambda) * (t - s) *
                           (t - s);
    return lm - rhs;
  }
  const double N = params.N().value();
  const double kappa = *params.kappa_eff();
  const ExtendedReal s0 = sigma(kappa, 1.0 - lambda, t - s);
  const ExtendedReal s1 = sigma(kappa, lambda, t - s);
  if (s0.is_infinite() || s1.is_infinite()) return std::nullopt;
  const double e = 1.0 / (N - 1.0);
  const double bracket = detail::log_sum_exp(std::log(s0.value()) + e * ls,
                                             std::log(s1.value()) + e * lt);
  return lm - (N - 1.0) * bracket;
}

/// Samples random (s, t, lambda) in the check region and tests the sharp
/// density inequality matching N (finite N including 0, or N = inf).
inline CheckReport check_cd_density(const NeedleDensity& rho,
                                    const CdParams& params,
                                    std::size_t trials = 10000,
                                    std::uint64_t seed = kDefaultSeed,
                                    double tol = 1e-9) {
  CheckReport report;
  report.seed = seed;
  report.tolerance = tol;
  const auto [a, b] = rho.cd_region();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bool first = true;
  for (std::size_t i = 0; i < trials; ++i) {
    double s = a + (b - a) * unit(rng);
    double t = a + (b - a) * unit(rng);
    double lambda = unit(rng);
    if (s > t) std::swap(s, t);
    ++report.trials;
    if (!(t > s) || !(lambda > 0.0) || !(s > a) || !(t < b) ||
        rho.log_unnormalized(s) == -kInf || rho.log_unnormalized(t) == -kInf) {
      ++report.vacuous;
      continue;
    }
    const auto margin = cd_density_margin(rho, params, s, t, lambda);
    if (!margin) {
      ++report.vacuous;
      continue;
    }
    detail::record(report, *margin, first);
    first = false;
  }
  return report;
}

struct McpReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double min_lower_gap = kInf;   // log(rho(t)/rho(s)) - log(lower bound)
  double max_lower_gap = -kInf;
  double min_upper_gap = kInf;   // log(upper bound) - log(rho(t)/rho(s))
  double max_upper_gap = -kInf;
  double a = 0.0;
  double b = 0.0;
  std::uint64_t seed = kDefaultSeed;
  double tolerance = 0.0;
};

/// Two-sided ratio bound {s_k(b-t)/s_k(b-s)}^{N-1} <= rho(t)/rho(s) <=
/// {s_k(t-a)/s_k(s-a)}^{N-1} for a < s < t < b, in log form.
inline McpReport check_mcp_ratio(
    const NeedleDensity& rho, const CdParams& params,
    std::size_t trials = 1000, std::uint64_t seed = kDefaultSeed,
    double tol = 1e-9,
    std::optional<std::pair<double, double>> endpoints = std::nullopt) {
  if (params.N().is_infinite() || !(params.N().value() > 1.0)) {
    throw Error(ErrorKind::kBadDimension, "MCP ratio check needs finite N > 1");
  }
  const double N = params.N().value();
  const double kappa = *params.kappa_eff();
  McpReport report;
  report.seed = seed;
  report.tolerance = tol;
  const auto [a, b] = endpoints ? *endpoints : rho.cd_region();
  report.a = a;
  report.b = b;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < trials; ++i) {
    double s = a + (b - a) * unit(rng);
    double t = a + (b - a) * unit(rng);
    if (s > t) std::swap(s, t);
    if (!(s > a && t > s && t < b)) continue;
    ++report.trials;
    const double mid = rho.log_unnormalized(t) - rho.log_unnormalized(s);
    const double lower = (N - 1.0) * (std::log(sin_like(kappa, b - t)) -
                                      std::log(sin_like(kappa, b - s)));
    const double upper = (N - 1.0) * (std::log(sin_like(kappa, t - a)) -
                                      std::log(sin_like(kappa, s - a)));
    const double gl = mid - lower;
    const double gu = upper - mid;
    report.min_lower_gap = std::min(report.min_lower_gap, gl);
    report.max_lower_gap = std::max(report.max_lower_gap, gl);
    report.min_upper_gap = std::min(report.min_upper_gap, gu);
    report.max_upper_gap = std::max(report.max_upper_gap, gu);
    if (gl < -tol || gu < -tol) ++report.violations;
  }
  return report;
}

/// psi = -log rho on an interior grid of the check region; tests
/// psi'' - psi'^2/(N-1) >= K (finite N), psi'' + psi'^2 >= K (N = 0) or
/// psi'' >= K (N = inf). Uses closed-form derivatives when available and
/// central differences with step h otherwise.
inline CheckReport check_differential_form(const NeedleDensity& rho,
                                           const CdParams& params,
                                           std::size_t points = 2000,
                                           double tol = 1e-6,
                                           double h = 1e-4) {
  CheckReport report;
  report.tolerance = tol;
  report.seed = 0;
  const DensityShape& shape = rho.shape();
  const bool analytic = shape.psi_derivatives(rho.cd_region().first +
                                              0.5 * (rho.cd_region().second -
                                                     rho.cd_region().first))
                            .has_value();
  if (!analytic && !shape.smooth()) {
    throw Error(ErrorKind::kNonSmoothDensity,
                "density is flagged non-differentiable");
  }
  const auto [a, b] = rho.cd_region();
  bool first = true;
  for (std::size_t i = 0; i < points; ++i) {
    const double t = a + (b - a) * (static_cast<double>(i) + 1.0) /
                             (static_cast<double>(points) + 1.0);
    double d1 = 0.0;
    double d2 = 0.0;
    if (analytic) {
      std::tie(d1, d2) = *shape.psi_derivatives(t);
    } else {
      const double p0 = -shape.log_value(t);
      const double pp = -shape.log_value(t + h);
      const double pm = -shape.log_value(t - h);
      d1 = (pp - pm) / (2.0 * h);
      d2 = (pp - 2.0 * p0 + pm) / (h * h);
    }
    double lhs;
    if (params.N().is_infinite()) {
      lhs = d2;
    } else {
      lhs = d2 - d1 * d1 / (params.N().value() - 1.0);
    }
    if (!std::isfinite(lhs)) continue;
    ++report.trials;
    detail::record(report, lhs - params.K(), first);
    first = false;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Mollification.

namespace detail {

// Bump mollifier on [0, 1] with unit mass under the fixed composite rule
// below, and its first two derivatives.
class UnitMollifier {
 public:
  static const UnitMollifier& instance() {
    static const UnitMollifier m;
    return m;
  }

  double value(double u) const { return c_ * raw(2.0 * u - 1.0); }
  double d1(double u) const { return 2.0 * c_ * raw_d1(2.0 * u - 1.0); }
  double d2(double u) const { return 4.0 * c_ * raw_d2(2.0 * u - 1.0); }

  // Nodes and weights of a composite Gauss rule on [lo, hi] subset [0, 1].
  void rule_on(double lo, double hi, std::vector<double>& u,
               std::vector<double>& w) const {
    for (std::size_t p = 0; p + 1 < kBreaks.size(); ++p) {
      const double pa = kBreaks[p];
      const double pb = kBreaks[p + 1];
      const double a = std::max(lo, pa);
      const double b = std::min(hi, pb);
      if (!(b > a)) continue;
      const double half = 0.5 * (b - a);
      const double mid = 0.5 * (a + b);
      for (std::size_t i = 0; i < gauss_.nodes.size(); ++i) {
        u.push_back(mid + half * gauss_.nodes[i]);
        w.push_back(half * gauss_.weights[i]);
      }
    }
  }

 private:
  // Panels graded towards both ends, where the derivatives of the bump are
  // steepest.
  static constexpr std::array<double, 19> kBreaks{
      0.0,  0.02, 0.04, 0.07, 0.1,  0.14, 0.2,  0.27, 0.35, 0.5,
      0.65, 0.73, 0.8,  0.86, 0.9,  0.93, 0.96, 0.98, 1.0};

  UnitMollifier() : gauss_(numerics::gauss_legendre(16)) {
    std::vector<double> u;
    std::vector<double> w;
    c_ = 1.0;
    rule_on(0.0, 1.0, u, w);
    double total = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) total += w[i] * value(u[i]);
    c_ = 1.0 / total;
  }

  static double raw(double x) {
    const double q = 1.0 - x * x;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
  }
  static double raw_d1(double x) {
    const double q = 1.0 - x * x;
    return q > 0.0 ? raw(x) * (-2.0 * x / (q * q)) : 0.0;
  }
  static double raw_d2(double x) {
    const double q = 1.0 - x * x;
    if (!(q > 0.0)) return 0.0;
    const double x2 = x * x;
    return raw(x) *
           (4.0 * x2 / (q * q * q * q) - 2.0 / (q * q) - 8.0 * x2 / (q * q * q));
  }

  numerics::GaussRule gauss_;
  double c_ = 1.0;
};

}  // namespace detail

/// rho_{N,eps} = (rho^{1/(N-1)} * phi_eps)^{N-1} for finite N (N = 0 gives
/// the harmonic-mean convolution) and exp(log rho * phi_eps) for N = inf,
/// with phi supported in [0, 1]. Values are in absolute units of the
/// normalized base density.
class MollifiedShape final : public DensityShape {
 public:
  MollifiedShape(const NeedleDensity& base, const Dimension& N, double eps)
      : base_shape_(base.shape_ptr()),
        log_norm_(base.log_normalizer()),
        lo_(base.lo()),
        hi_(base.hi()),
        eps_(eps),
        infinite_(N.is_infinite()),
        power_(N.is_infinite() ? 0.0 : N.value() - 1.0),
        breaks_(base.shape().breakpoints()),
        hint_(0.5 * (base.cd_region().first + base.cd_region().second)) {
    breaks_.push_back(lo_);
    breaks_.push_back(hi_);
    std::sort(breaks_.begin(), breaks_.end());
  }

  /// Window [t - eps, t] must lie inside the base support unless N > 1.
  bool needs_full_window() const { return infinite_ || power_ < 0.0; }
  double support_lo() const { return needs_full_window() ? lo_ + eps_ : lo_; }
  double support_hi() const { return needs_full_window() ? hi_ : hi_ + eps_; }

  double log_value(double t) const override {
    const Integrals g = integrate(t, false);
    if (!g.ok) return -kInf;
    if (infinite_) return g.g0;
    if (!(g.g0 > 0.0)) return -kInf;
    return power_ * std::log(g.g0);
  }

  std::optional<std::pair<double, double>> psi_derivatives(
      double t) const override {
    const Integrals g = integrate(t, true);
    if (!g.ok) return std::pair{kNaN(), kNaN()};
    if (infinite_) return std::pair{-g.g1, -g.g2};
    const double r1 = g.g1 / g.g0;
    return std::pair{-power_ * r1, -power_ * (g.g2 / g.g0 - r1 * r1)};
  }

  std::vector<double> breakpoints() const override { return {}; }
  double hint() const override { return hint_; }
  std::string kind() const override { return "mollified"; }

 private:
  struct Integrals {
    bool ok = false;
    double g0 = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
  };

  static double kNaN() { return std::numeric_limits<double>::quiet_NaN(); }

  double integrand(double x) const {
    if (x < lo_ || x > hi_) return infinite_ ? -kInf : 0.0;
    const double l = base_shape_->log_value(x) - log_norm_;
    if (infinite_) return l;
    return std::exp(l / power_);
  }

  Integrals integrate(double t, bool derivs) const {
    Integrals out;
    if (needs_full_window()) {
      if (t - eps_ < lo_ || t > hi_) return out;
    } else if (t < lo_ || t - eps_ > hi_) {
      return out;
    }
    const auto& moll = detail::UnitMollifier::instance();
    // Split [0,1] where t - eps u crosses a base breakpoint.
    std::vector<double> cuts = {0.0, 1.0};
    for (double bp : breaks_) {
      const double u = (t - bp) / eps_;
      if (u > 0.0 && u < 1.0) cuts.push_back(u);
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> us;
    std::vector<double> ws;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      if (cuts.size() == 2) {
        moll.rule_on(0.0, 1.0, us, ws);
      } else {
        // Map the full composite rule onto each piece.
        std::vector<double> u0;
        std::vector<double> w0;
        moll.rule_on(0.0, 1.0, u0, w0);
        const double len = cuts[c + 1] - cuts[c];
        for (std::size_t i = 0; i < u0.size(); ++i) {
          us.push_back(cuts[c] + len * u0[i]);
          ws.push_back(len * w0[i]);
        }
      }
    }
    for (std::size_t i = 0; i < us.size(); ++i) {
      const double h = integrand(t - eps_ * us[i]);
      if (infinite_ && h == -kInf) {
        if (moll.value(us[i]) > 0.0) return out;
        continue;
      }
      out.g0 += ws[i] * moll.value(us[i]) * h;
      if (derivs) {
        out.g1 += ws[i] * moll.d1(us[i]) * h;
        out.g2 += ws[i] * moll.d2(us[i]) * h;
      }
    }
    out.g1 /= eps_;
    out.g2 /= eps_ * eps_;
    out.ok = true;
    return out;
  }

  std::shared_ptr<const DensityShape> base_shape_;
  double log_norm_;
  double lo_;
  double hi_;
  double eps_;
  bool infinite_;
  double power_;
  std::vector<double> breaks_;
  double hint_;
};

struct MollifyResult {
  NeedleDensity density;  // renormalized rho_{N,eps}
  double mass;            // m_{N,eps} before renormalization
  std::shared_ptr<const MollifiedShape> shape;
};

/// Smooths rho by the mollifier at scale eps in the manner matching N and
/// renormalizes. The check region of the result is [a + eps, b] where
/// [a, b] is the check region of rho: there the whole mollifier window sees
/// the base density.
inline MollifyResult mollify(const NeedleDensity& rho, const CdParams& params,
                             double eps, std::size_t cells = 1500) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw Error(ErrorKind::kInvalidArgument, "eps must be positive");
  }
  auto shape = std::make_shared<MollifiedShape>(rho, params.N(), eps);
  NeedleDensity::Options opts;
  opts.cells = cells;
  std::optional<NeedleDensity> out;
  try {
    out.emplace(shape, shape->support_lo(), shape->support_hi(), opts);
  } catch (const Error& e) {
    throw Error(ErrorKind::kMassDiverged, e.what());
  }
  const double mass = std::exp(out->log_normalizer());
  if (!std::isfinite(mass) || !(mass > 0.0)) {
    throw Error(ErrorKind::kMassDiverged, "mollified mass is not finite");
  }
  const auto [a, b] = rho.cd_region();
  out->set_cd_region(a + eps, b);
  return {std::move(*out), mass, shape};
}

// ---------------------------------------------------------------------------
// Monotone transport on the line.

namespace detail {

// True when the CDF has no flat stretch strictly inside the support.
inline bool cdf_strictly_increasing(const NeedleDensity& rho) {
  const std::size_t cells = rho.nodes().size() - 1;
  std::size_t first = cells;
  std::size_t last = 0;
  for (std::size_t k = 0; k < cells; ++k) {
    if (rho.cell_mass(k) > 0.0) {
      first = std::min(first, k);
      last = k;
    }
  }
  for (std::size_t k = first; k < last; ++k) {
    if (!(rho.cell_mass(k) > 0.0)) return false;
  }
  return true;
}

inline std::vector<double> quantile_levels(std::size_t cells) {
  std::vector<double> u(cells + 1);
  for (std::size_t j = 0; j <= cells; ++j) {
    u[j] = 0.5 * (1.0 - std::cos(kPi * static_cast<double>(j) / cells));
  }
  u.front() = 0.0;
  u.back() = 1.0;
  return u;
}

inline double harmonic_density(double lambda, double r0, double r1) {
  double inv = 0.0;
  if (lambda < 1.0) inv += (1.0 - lambda) / r0;
  if (lambda > 0.0) inv += lambda / r1;
  return inv == kInf ? 0.0 : 1.0 / inv;
}

}  // namespace detail

struct InterpolationResult {
  NeedleDensity density;   // mu_lambda
  double w2;               // W_2(mu_0, mu_1)
  std::vector<double> x;   // nodes x_lambda(u_j)
  std::vector<double> rho; // density of mu_lambda at the nodes
};

/// mu_lambda = ((1 - lambda) id + lambda T)_# mu_0 with T the monotone
/// rearrangement, computed on a quantile grid.
inline InterpolationResult displacement_interpolate(const NeedleDensity& rho0,
                                                    const NeedleDensity& rho1,
                                                    double lambda,
                                                    std::size_t cells = 20000) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "lambda must lie in [0, 1]");
  }
  if (!detail::cdf_strictly_increasing(rho0) ||
      !detail::cdf_strictly_increasing(rho1)) {
    throw Error(ErrorKind::kQuantileFailure,
                "CDF is not strictly increasing inside the support");
  }
  const std::vector<double> u = detail::quantile_levels(cells);
  std::vector<double> x;
  std::vector<double> r;
  x.reserve(u.size());
  r.reserve(u.size());
  std::vector<double> gap2(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double q0 = rho0.quantile(u[j]);
    const double q1 = rho1.quantile(u[j]);
    gap2[j] = (q1 - q0) * (q1 - q0);
    const double xl = (1.0 - lambda) * q0 + lambda * q1;
    const double rl =
        detail::harmonic_density(lambda, rho0.pdf(q0), rho1.pdf(q1));
    if (!x.empty() && !(xl > x.back())) continue;
    x.push_back(xl);
    r.push_back(rl);
  }
  if (x.size() < 2) {
    throw Error(ErrorKind::kQuantileFailure, "degenerate quantile grid");
  }
  const double w2 = std::sqrt(numerics::trapezoid(u, gap2));
  NeedleDensity out = NeedleDensity::sampled(x, r);
  return {std::move(out), w2, std::move(x), std::move(r)};
}

struct EntropyPoint {
  double lambda;
  double lhs;
  double rhs;
  double margin;  // rhs - lhs
  bool vacuous;
};

struct EntropyReport {
  std::vector<EntropyPoint> points;
  std::size_t violations = 0;
  double tolerance = 0.0;
};

/// Convexity of Ent (N = inf), S_N (finite N != 0) or S_0 (N = 0) along the
/// W_2 geodesic between rho0 and rho1 (Lebesgue densities) relative to the
/// reference measure exp(-V) dt, with the monotone coupling.
inline EntropyReport check_entropy_convexity(
    const NeedleDensity& rho0, const NeedleDensity& rho1,
    const CdParams& params, const std::vector<double>& lambda_grid,
    const std::function<double(double)>& V, std::size_t cells = 20000,
    double tol = 1e-6) {
  EntropyReport report;
  report.tolerance = tol;
  const std::size_t M = cells;
  std::vector<double> q0(M);
  std::vector<double> q1(M);
  std::vector<double> r0(M);
  std::vector<double> r1(M);
  for (std::size_t j = 0; j < M; ++j) {
    const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(M);
    q0[j] = rho0.quantile(u);
    q1[j] = rho1.quantile(u);
    r0[j] = rho0.pdf(q0[j]);
    r1[j] = rho1.pdf(q1[j]);
  }
  const double K = params.K();
  for (double lambda : lambda_grid) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
      throw Error(ErrorKind::kInvalidArgument, "lambda grid must lie in (0,1)");
    }
    EntropyPoint p{lambda, 0.0, 0.0, 0.0, false};
    double lhs = 0.0;
    double rhs = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      const double x = (1.0 - lambda) * q0[j] + lambda * q1[j];
      const double dist = std::abs(q1[j] - q0[j]);
      // Densities with respect to exp(-V) dt.
      const double e0 = r0[j] * std::exp(V(q0[j]));
      const double e1 = r1[j] * std::exp(V(q1[j]));
      const double el =
          detail::harmonic_density(lambda, r0[j], r1[j]) * std::exp(V(x));
      if (params.N().is_infinite()) {
        lhs += std::log(el);
        rhs += (1.0 - lambda) * std::log(e0) + lambda * std::log(e1) -
               0.5 * K * lambda * (1.0 - lambda) * dist * dist;
        continue;
      }
      const double N = params.N().value();
      if (N == 0.0) {
        const ExtendedReal a = sigma(-K, 1.0 - lambda, dist);
        const ExtendedReal b = sigma(-K, lambda, dist);
        lhs = std::max(lhs, el);
        if (a.is_infinite() || b.is_infinite()) {
          rhs = kInf;
        } else {
          rhs = std::max({rhs, a.value() / (1.0 - lambda) * e0,
                          b.value() / lambda * e1});
        }
        continue;
      }
      const ExtendedReal t0 = tau(params, 1.0 - lambda, dist);
      const ExtendedReal t1 = tau(params, lambda, dist);
      const double sign = N > 1.0 ? -1.0 : 1.0;
      lhs += sign * std::pow(el, -1.0 / N);
      if (t0.is_infinite() || t1.is_infinite()) {
        rhs = sign * kInf;
      } else if (std::isfinite(rhs)) {
        rhs += sign * (t0.value() * std::pow(e0, -1.0 / N) +
                       t1.value() * std::pow(e1, -1.0 / N));
      }
    }
    const bool is_max = params.N().is_finite() && params.N().value() == 0.0;
    if (!is_max) {
      lhs /= static_cast<double>(M);
      rhs /= static_cast<double>(M);
    }
    p.lhs = lhs;
    p.rhs = rhs;
    p.vacuous = !std::isfinite(rhs);
    p.margin = p.vacuous ? kInf : rhs - lhs;
    if (p.margin < -tol) ++report.violations;
    report.points.push_back(p);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Isoperimetry on an asymmetric line.

/// The line with d(s, t) = t - s for t >= s and d(t, s) = backward_factor
/// (t - s).
struct AsymLine {
  double backward_factor = 1.0;

  explicit AsymLine(double lb = 1.0) : backward_factor(lb) {
    if (!(lb > 0.0) || !std::isfinite(lb)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "backward factor must be positive");
    }
  }

  double reversibility() const {
    return std::max(backward_factor, 1.0 / backward_factor);
  }
};

struct Profile1dResult {
  double value;
  double u;  // minimizing set is [u, w]
  double w;
};

struct Profile1dOptions {
  std::size_t scan = 20000;
  bool half_intervals_only = false;
};

/// Forward boundary content rho(w) + rho(u)/backward_factor of [u, w], with
/// endpoints on the domain boundary contributing nothing.
inline double interval_boundary(const NeedleDensity& rho, const AsymLine& line,
                                double u, double w) {
  double c = 0.0;
  if (w < rho.hi()) c += rho.pdf(w);
  if (u > rho.lo()) c += rho.pdf(u) / line.backward_factor;
  return c;
}

/// Minimum forward boundary content over half-intervals and intervals of
/// measure theta.
inline Profile1dResult profile_1d(const NeedleDensity& rho,
                                  const AsymLine& line, double theta,
                                  const Profile1dOptions& opts = {}) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "theta must lie in (0, 1)");
  }
  auto cost_at = [&](double v) {
    const double u = v <= 0.0 ? rho.lo() : rho.quantile(v);
    const double w = v + theta >= 1.0 ? rho.hi() : rho.quantile(v + theta);
    return std::tuple{interval_boundary(rho, line, u, w), u, w};
  };
  Profile1dResult best{kInf, 0.0, 0.0};
  auto consider = [&](double v) {
    const auto [c, u, w] = cost_at(v);
    if (c < best.value) best = {c, u, w};
    return c;
  };
  consider(0.0);
  consider(1.0 - theta);
  if (opts.half_intervals_only) return best;
  const std::size_t S = std::max<std::size_t>(opts.scan, 4);
  const double span = 1.0 - theta;
  double best_scan = kInf;
  std::size_t arg = 0;
  for (std::size_t k = 1; k < S; ++k) {
    const double v = span * static_cast<double>(k) / static_cast<double>(S);
    const double c = consider(v);
    if (c < best_scan) {
      best_scan = c;
      arg = k;
    }
  }
  if (arg > 0) {
    const double a = span * static_cast<double>(arg - 1) / S;
    const double b = span * static_cast<double>(arg + 1) / S;
    const auto [v, c] = numerics::golden_minimize(
        [&](double t) { return std::get<0>(cost_at(t)); }, a, b, 1e-14);
    consider(v);
  }
  return best;
}

/// Forward boundary content of a finite union of closed intervals.
inline double boundary_measure_1d(
    const NeedleDensity& rho, const AsymLine& line,
    std::vector<std::pair<double, double>> intervals) {
  for (const auto& [u, w] : intervals) {
    if (!(u <= w)) {
      throw Error(ErrorKind::kInvalidArgument, "interval with lo > hi");
    }
  }
  std::sort(intervals.begin(), intervals.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& iv : intervals) {
    if (!merged.empty()) {
      if (iv.first < merged.back().second) {
        throw Error(ErrorKind::kOverlappingIntervals, "intervals overlap");
      }
      if (iv.first == merged.back().second) {
        merged.back().second = iv.second;
        continue;
      }
    }
    merged.push_back(iv);
  }
  double total = 0.0;
  for (const auto& [u, w] : merged) {
    total += interval_boundary(rho, line, std::max(u, rho.lo()),
                               std::min(w, rho.hi()));
  }
  return total;
}

}  // namespace needle
