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

// Probability densities on intervals of the real line with cached CDF
// tables and quantile inversion.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "needle/comparison.hpp"
#include "needle/core.hpp"
#include "needle/numerics.hpp"

namespace needle {

/// Unnormalized log-density together with optional analytic derivatives of
/// psi = -log rho.
class DensityShape {
 public:
  virtual ~DensityShape() = default;

  /// log of the unnormalized density; -inf where the density vanishes.
  virtual double log_value(double t) const = 0;

  /// (psi', psi'') at t, when available in closed form.
  virtual std::optional<std::pair<double, double>> psi_derivatives(
      double /*t*/) const {
    return std::nullopt;
  }

  /// False for densities that are only piecewise smooth (sampled grids).
  virtual bool smooth() const { return true; }

  /// Points where the density may fail to be smooth.
  virtual std::vector<double> breakpoints() const { return {}; }

  /// A point with positive density, used to size infinite domains.
  virtual double hint() const { return 0.0; }

  virtual std::string kind() const = 0;
};

/// Constant density.
class UniformShape final : public DensityShape {
 public:
  double log_value(double) const override { return 0.0; }
  std::optional<std::pair<double, double>> psi_derivatives(
      double) const override {
    return std::pair{0.0, 0.0};
  }
  std::string kind() const override { return "uniform"; }
};

/// rho = g^p with g = A c_kappa(t - origin) + B s_kappa(t - origin), a
/// positive solution of the Jacobi equation g'' + kappa g = 0. With p = N-1
/// and kappa = K/(N-1) these are the equality cases of the CD(K,N)
/// inequalities (sin-power, cosh-power, sinh-power, exponential, affine).
class JacobiPowerShape final : public DensityShape {
 public:
  JacobiPowerShape(double kappa, double A, double B, double origin,
                   double power)
      : kappa_(kappa), A_(A), B_(B), origin_(origin), power_(power) {}

  double g(double t) const {
    const auto [c, s] = cs(t - origin_);
    return A_ * c + B_ * s;
  }

  double log_value(double t) const override {
    const double v = g(t);
    if (!(v > 0.0)) return -kInf;
    return power_ * std::log(v);
  }

  std::optional<std::pair<double, double>> psi_derivatives(
      double t) const override {
    const auto [c, s] = cs(t - origin_);
    const double gv = A_ * c + B_ * s;
    const double dg = -kappa_ * A_ * s + B_ * c;
    const double ratio = dg / gv;
    // g'' = -kappa g.
    return std::pair{-power_ * ratio, power_ * (kappa_ + ratio * ratio)};
  }

  double hint() const override { return origin_; }
  std::string kind() const override { return "jacobi-power"; }

  double kappa() const { return kappa_; }
  double power() const { return power_; }

 private:
  std::pair<double, double> cs(double r) const {
    if (kappa_ > 0.0) {
      const double q = std::sqrt(kappa_);
      return {std::cos(q * r), std::sin(q * r) / q};
    }
    if (kappa_ < 0.0) {
      const double q = std::sqrt(-kappa_);
      return {std::cosh(q * r), std::sinh(q * r) / q};
    }
    return {1.0, r};
  }

  double kappa_;
  double A_;
  double B_;
  double origin_;
  double power_;
};

/// rho = exp(-K t^2 / 2 + beta t): Gaussian for K > 0, exponential tilt for
/// K = 0.
class GaussTiltShape final : public DensityShape {
 public:
  GaussTiltShape(double K, double beta) : K_(K), beta_(beta) {}

  double log_value(double t) const override {
    return -0.5 * K_ * t * t + beta_ * t;
  }
  std::optional<std::pair<double, double>> psi_derivatives(
      double t) const override {
    return std::pair{K_ * t - beta_, K_};
  }
  double hint() const override { return K_ > 0.0 ? beta_ / K_ : 0.0; }
  std::string kind() const override { return K_ > 0.0 ? "gaussian" : "exp-tilt"; }

 private:
  double K_;
  double beta_;
};

/// Linear interpolation of nonnegative samples on increasing nodes.
class SampledShape final : public DensityShape {
 public:
  SampledShape(std::vector<double> nodes, std::vector<double> values)
      : nodes_(std::move(nodes)), values_(std::move(values)) {
    if (nodes_.size() < 2 || nodes_.size() != values_.size()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "sampled density needs matching node/value arrays");
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!(values_[i] >= 0.0) || !std::isfinite(values_[i])) {
        throw Error(ErrorKind::kInvalidArgument,
                    "sampled density values must be finite and nonnegative");
      }
      if (i > 0 && !(nodes_[i] > nodes_[i - 1])) {
        throw Error(ErrorKind::kInvalidArgument,
                    "sampled density nodes must be strictly increasing");
      }
    }
  }

  double value(double t) const {
    if (t < nodes_.front() || t > nodes_.back()) return 0.0;
    std::size_t k = static_cast<std::size_t>(
        std::upper_bound(nodes_.begin(), nodes_.end(), t) - nodes_.begin());
    if (k >= nodes_.size()) return values_.back();
    if (k == 0) return values_.front();
    const double w = (t - nodes_[k - 1]) / (nodes_[k] - nodes_[k - 1]);
    return (1.0 - w) * values_[k - 1] + w * values_[k];
  }

  double log_value(double t) const override {
    const double v = value(t);
    return v > 0.0 ? std::log(v) : -kInf;
  }
  bool smooth() const override { return false; }
  std::vector<double> breakpoints() const override { return nodes_; }
  double hint() const override { return nodes_[nodes_.size() / 2]; }
  std::string kind() const override { return "sampled"; }

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
};

/// Arbitrary log-density given as a callable, for tests and families.
class FunctionShape final : public DensityShape {
 public:
  using LogFn = std::function<double(double)>;
  using DerivFn = std::function<std::pair<double, double>(double)>;

  FunctionShape(LogFn log_fn, DerivFn derivs = nullptr, double hint = 0.0,
                std::string name = "function")
      : log_fn_(std::move(log_fn)),
        derivs_(std::move(derivs)),
        hint_(hint),
        name_(std::move(name)) {}

  double log_value(double t) const override { return log_fn_(t); }
  std::optional<std::pair<double, double>> psi_derivatives(
      double t) const override {
    if (!derivs_) return std::nullopt;
    return derivs_(t);
  }
  double hint() const override { return hint_; }
  std::string kind() const override { return name_; }

 private:
  LogFn log_fn_;
  DerivFn derivs_;
  double hint_;
  std::string name_;
};

struct NeedleDensityOptions {
  std::size_t cells = 20000;
  // Infinite ends are cut where the density falls below exp(-tail_log)
  // times its running maximum.
  double tail_log = 50.0;
};

/// A probability density on [lo, hi] (either end may be infinite) with an
/// eagerly built CDF table. Immutable after construction.
class NeedleDensity {
 public:
  using Options = NeedleDensityOptions;

  NeedleDensity(std::shared_ptr<const DensityShape> shape, double lo,
                double hi)
      : NeedleDensity(std::move(shape), lo, hi, Options{}) {}

  NeedleDensity(std::shared_ptr<const DensityShape> shape, double lo, double hi,
                Options opts)
      : shape_(std::move(shape)), domain_lo_(lo), domain_hi_(hi) {
    if (!(lo < hi) || std::isnan(lo) || std::isnan(hi)) {
      throw Error(ErrorKind::kInvalidArgument, "density domain needs lo < hi");
    }
    lo_ = std::isfinite(lo) ? lo : extent(-1.0, hi, opts.tail_log);
    hi_ = std::isfinite(hi) ? hi : extent(+1.0, lo, opts.tail_log);
    build_table(std::max<std::size_t>(opts.cells, 16));
    cd_lo_ = lo_;
    cd_hi_ = hi_;
  }

  // --- Factories for the closed-form families. ---

  static NeedleDensity uniform(double a, double b, Options opts = {}) {
    return NeedleDensity(std::make_shared<UniformShape>(), a, b, opts);
  }

  /// rho proportional to sin(sqrt(kappa) t)^{N-1} on [0, pi/sqrt(kappa)],
  /// kappa = K/(N-1): the model density of CD(K,N) with K > 0, N > 1.
  static NeedleDensity sin_power(double K, double N, Options opts = {}) {
    if (!(N > 1.0) || !(K > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "sin-power needs K > 0, N > 1");
    }
    const double kappa = K / (N - 1.0);
    return NeedleDensity(
        std::make_shared<JacobiPowerShape>(kappa, 0.0, 1.0, 0.0, N - 1.0), 0.0,
        conjugate_radius(kappa), opts);
  }

  /// rho proportional to exp(-K (t - mean)^2 / 2) on the whole line.
  static NeedleDensity gaussian(double K, double mean = 0.0,
                                Options opts = {}) {
    if (!(K > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "gaussian needs K > 0");
    }
    return NeedleDensity(std::make_shared<GaussTiltShape>(K, K * mean), -kInf,
                         kInf, opts);
  }

  /// rho proportional to exp(beta t) on [a, b].
  static NeedleDensity exp_tilt(double beta, double a, double b,
                                Options opts = {}) {
    return NeedleDensity(std::make_shared<GaussTiltShape>(0.0, beta), a, b,
                         opts);
  }

  static NeedleDensity sampled(std::vector<double> nodes,
                               std::vector<double> values, Options opts = {}) {
    const double a = nodes.front();
    const double b = nodes.back();
    return NeedleDensity(std::make_shared<SampledShape>(std::move(nodes),
                                                        std::move(values)),
                         a, b, opts);
  }

  // --- Accessors. ---

  double domain_lo() const { return domain_lo_; }
  double domain_hi() const { return domain_hi_; }
  /// Finite interval carrying the CDF table.
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  const DensityShape& shape() const { return *shape_; }
  std::shared_ptr<const DensityShape> shape_ptr() const { return shape_; }
  bool smooth() const { return shape_->smooth(); }

  /// Interval on which curvature-dimension checks are meaningful (all of
  /// the support unless narrowed, e.g. after mollification).
  std::pair<double, double> cd_region() const { return {cd_lo_, cd_hi_}; }
  void set_cd_region(double a, double b) {
    cd_lo_ = std::max(a, lo_);
    cd_hi_ = std::min(b, hi_);
  }

  double log_normalizer() const { return log_norm_; }

  double log_unnormalized(double t) const { return shape_->log_value(t); }

  double log_pdf(double t) const {
    if (t < lo_ || t > hi_) return -kInf;
    return shape_->log_value(t) - log_norm_;
  }

  double pdf(double t) const {
    const double l = log_pdf(t);
    return l == -kInf ? 0.0 : std::exp(l);
  }

  /// Mass of the table computed by an independent adaptive quadrature.
  double quadrature_mass(double tol = 1e-12) const {
    return numerics::adaptive_simpson([&](double t) { return pdf(t); }, lo_,
                                      hi_, tol, 256);
  }

  double cdf(double t) const {
    if (!(t > lo_)) return 0.0;
    if (!(t < hi_)) return 1.0;
    const std::size_t k = cell_of(t);
    return (cum_[k] + partial(nodes_[k], t)) / cum_.back();
  }

  double quantile(double u) const {
    if (!(u > 0.0)) return lo_;
    if (!(u < 1.0)) return hi_;
    const double target = u * cum_.back();
    std::size_t k = static_cast<std::size_t>(
        std::upper_bound(cum_.begin(), cum_.end(), target) - cum_.begin());
    k = std::clamp<std::size_t>(k, 1, nodes_.size() - 1) - 1;
    // Skip empty cells so that the inversion lands on the support.
    while (k + 1 < nodes_.size() - 1 && cum_[k + 1] <= target &&
           cum_[k + 1] - cum_[k] <= 0.0) {
      ++k;
    }
    double a = nodes_[k];
    double b = nodes_[k + 1];
    const double need = target - cum_[k];
    const double cell = cum_[k + 1] - cum_[k];
    if (!(cell > 0.0)) return a;
    double x = a + (b - a) * std::clamp(need / cell, 0.0, 1.0);
    double lo = a;
    double hi = b;
    for (int it = 0; it < 60; ++it) {
      const double f = partial(a, x) - need;
      if (f > 0.0) {
        hi = x;
      } else {
        lo = x;
      }
      const double rho = std::exp(shape_->log_value(x) - log_ref_);
      double next = rho > 0.0 ? x - f / rho : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x)) ||
          hi - lo <= 1e-15 * std::max(1.0, std::abs(x))) {
        return next;
      }
      x = next;
    }
    return x;
  }

  /// Table nodes and cumulative (unnormalized) masses.
  const std::vector<double>& nodes() const { return nodes_; }
  double cell_mass(std::size_t k) const {
    return (cum_[k + 1] - cum_[k]) / cum_.back();
  }

 private:
  static constexpr int kCellOrder = 10;

  static const numerics::GaussRule& rule() {
    static const numerics::GaussRule r = numerics::gauss_legendre(kCellOrder);
    return r;
  }

  double scaled(double t) const {
    const double l = shape_->log_value(t);
    return l == -kInf ? 0.0 : std::exp(l - log_ref_);
  }

  // Integral of the scaled density over [a, b] within one smooth piece.
  double partial(double a, double b) const {
    if (!(b > a)) return 0.0;
    const auto& r = rule();
    const double h = 0.5 * (b - a);
    const double c = 0.5 * (a + b);
    double s = 0.0;
    for (int i = 0; i < kCellOrder; ++i) {
      s += r.weights[i] * scaled(c + h * r.nodes[i]);
    }
    return s * h;
  }

  std::size_t cell_of(double t) const {
    std::size_t k = static_cast<std::size_t>(
        std::upper_bound(nodes_.begin(), nodes_.end(), t) - nodes_.begin());
    return std::clamp<std::size_t>(k, 1, nodes_.size() - 1) - 1;
  }

  // Marches from the hint towards an infinite end until the log-density has
  // dropped tail_log below its running maximum, then bisects the crossing.
  double extent(double dir, double other_end, double tail_log) const {
    double x0 = shape_->hint();
    if (std::isfinite(other_end)) {
      x0 = dir > 0 ? std::max(x0, other_end) : std::min(x0, other_end);
    }
    double lmax = shape_->log_value(x0);
    if (!std::isfinite(lmax)) {
      throw Error(ErrorKind::kMassDiverged,
                  "density hint lies outside the support");
    }
    double prev = x0;
    double step = 1.0;
    for (int i = 0; i < 80; ++i, step *= 2.0) {
      const double x = x0 + dir * step;
      const double l = shape_->log_value(x);
      if (l > lmax) lmax = l;
      if (l < lmax - tail_log) {
        double a = prev;
        double b = x;
        for (int j = 0; j < 100; ++j) {
          const double m = 0.5 * (a + b);
          if (shape_->log_value(m) < lmax - tail_log) {
            b = m;
          } else {
            a = m;
          }
        }
        return b;
      }
      prev = x;
    }
    throw Error(ErrorKind::kMassDiverged, "density tail is not integrable");
  }

  void build_table(std::size_t cells) {
    nodes_.clear();
    nodes_.reserve(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) {
      nodes_.push_back(i == cells ? hi_
                                  : lo_ + (hi_ - lo_) * static_cast<double>(i) /
                                              static_cast<double>(cells));
    }
    for (double bp : shape_->breakpoints()) {
      if (bp > lo_ && bp < hi_) nodes_.push_back(bp);
    }
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());

    log_ref_ = -kInf;
    for (double x : nodes_) log_ref_ = std::max(log_ref_, shape_->log_value(x));
    const auto& r = rule();
    for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) {
      const double h = 0.5 * (nodes_[k + 1] - nodes_[k]);
      const double c = 0.5 * (nodes_[k + 1] + nodes_[k]);
      for (int i = 0; i < kCellOrder; ++i) {
        log_ref_ = std::max(log_ref_, shape_->log_value(c + h * r.nodes[i]));
      }
    }
    if (!std::isfinite(log_ref_)) {
      throw Error(ErrorKind::kMassDiverged,
                  "density vanishes or is infinite on its domain");
    }
    cum_.assign(nodes_.size(), 0.0);
    for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) {
      cum_[k + 1] = cum_[k] + partial(nodes_[k], nodes_[k + 1]);
    }
    const double total = cum_.back();
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw Error(ErrorKind::kMassDiverged, "density has no finite mass");
    }
    log_norm_ = log_ref_ + std::log(total);
  }

  std::shared_ptr<const DensityShape> shape_;
  double domain_lo_;
  double domain_hi_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double cd_lo_ = 0.0;
  double cd_hi_ = 0.0;
  double log_ref_ = 0.0;
  double log_norm_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> cum_;
};

}  // namespace needle
