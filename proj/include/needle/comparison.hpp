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

// Comparison functions s_kappa, sigma^(lambda)_kappa and tau^(lambda)_{K,N}.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

#include "needle/core.hpp"

namespace needle {

/// Effective dimension N: a finite real or the distinguished value infinity.
class Dimension {
 public:
  static constexpr Dimension finite(double n) { return Dimension(n, false); }
  static constexpr Dimension infinity() { return Dimension(0.0, true); }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr bool is_finite() const { return !infinite_; }

  double value() const {
    if (infinite_) {
      throw Error(ErrorKind::kBadDimension, "N is infinite");
    }
    return value_;
  }

  std::string to_string() const {
    if (infinite_) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value_);
    return buf;
  }

  friend constexpr bool operator==(const Dimension& a, const Dimension& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }

 private:
  constexpr Dimension(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

/// Curvature bound K, effective dimension N and topological dimension n.
/// Construction validates N against the admissible set (-inf,0] u [n,inf].
class CdParams {
 public:
  CdParams(double K, Dimension N, int n = 1) : K_(K), N_(N), n_(n) {
    if (!std::isfinite(K)) {
      throw Error(ErrorKind::kInvalidArgument, "K must be finite");
    }
    if (n < 1) {
      throw Error(ErrorKind::kBadDimension, "n must be a positive integer");
    }
    if (N.is_finite()) {
      const double v = N.value();
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::kBadDimension, "finite N must be a real number");
      }
      if (v > 0.0 && v < n) {
        throw Error(ErrorKind::kBadDimension,
                    "N=" + N.to_string() + " lies in (0, n)");
      }
      if (v == 1.0 && n == 1) {
        throw Error(ErrorKind::kBadDimension, "N=1 is excluded when n=1");
      }
    }
  }

  double K() const { return K_; }
  const Dimension& N() const { return N_; }
  int n() const { return n_; }

  /// K/(N-1); empty for N = infinity.
  std::optional<double> kappa_eff() const {
    if (N_.is_infinite()) return std::nullopt;
    return K_ / (N_.value() - 1.0);
  }

 private:
  double K_;
  Dimension N_;
  int n_;
};

namespace detail {

// s_kappa(r) = r * (1 - x/6 + x^2/120 - x^3/5040 + x^4/362880), x = kappa r^2.
inline double sin_like_series(double kappa, double r) {
  const double x = kappa * r * r;
  return r * (1.0 + x * (-1.0 / 6.0 +
                         x * (1.0 / 120.0 +
                              x * (-1.0 / 5040.0 + x * (1.0 / 362880.0)))));
}

inline constexpr double kSeriesThreshold = 1e-6;

}  // namespace detail

/// pi/sqrt(kappa) for kappa > 0, +inf otherwise.
inline double conjugate_radius(double kappa) {
  return kappa > 0.0 ? kPi / std::sqrt(kappa) : kInf;
}

/// Solution of f'' + kappa f = 0 with f(0) = 0, f'(0) = 1.
inline double sin_like(double kappa, double r) {
  if (!(r >= 0.0) || !std::isfinite(kappa)) {
    throw Error(ErrorKind::kInvalidArgument,
                "sin_like needs r >= 0 and finite kappa");
  }
  if (kappa > 0.0) {
    const double limit = conjugate_radius(kappa);
    if (r > limit * (1.0 + 1e-12)) {
      throw Error(ErrorKind::kDomainExceeded,
                  "r exceeds pi/sqrt(kappa) for kappa > 0");
    }
  }
  if (std::abs(kappa) * r * r < detail::kSeriesThreshold) {
    return detail::sin_like_series(kappa, r);
  }
  if (kappa > 0.0) {
    const double q = std::sqrt(kappa);
    return std::max(0.0, std::sin(q * r) / q);
  }
  const double q = std::sqrt(-kappa);
  return std::sinh(q * r) / q;
}

/// Derivative of sin_like in r, i.e. the cosine-like Jacobi solution.
inline double cos_like(double kappa, double r) {
  if (kappa > 0.0) return std::cos(std::sqrt(kappa) * r);
  if (kappa < 0.0) return std::cosh(std::sqrt(-kappa) * r);
  return 1.0;
}

/// sigma^(lambda)_kappa(r) = s_kappa(lambda r) / s_kappa(r), with value
/// lambda at r = 0 and +inf from the conjugate radius on.
inline ExtendedReal sigma(double kappa, double lambda, double r) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "lambda must lie in (0,1)");
  }
  if (!(r >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "r must be nonnegative");
  }
  if (r == 0.0) return ExtendedReal::finite(lambda);
  if (kappa > 0.0 && r >= conjugate_radius(kappa)) {
    return ExtendedReal::positive_infinity();
  }
  const double x = kappa * r * r;
  if (std::abs(x) < detail::kSeriesThreshold) {
    const double xl = x * lambda * lambda;
    const double num = 1.0 + xl * (-1.0 / 6.0 +
                                   xl * (1.0 / 120.0 +
                                         xl * (-1.0 / 5040.0 +
                                               xl * (1.0 / 362880.0))));
    const double den = 1.0 + x * (-1.0 / 6.0 +
                                  x * (1.0 / 120.0 +
                                       x * (-1.0 / 5040.0 +
                                            x * (1.0 / 362880.0))));
    return ExtendedReal::finite(lambda * num / den);
  }
  const double den = sin_like(kappa, r);
  if (!(den > 0.0)) return ExtendedReal::positive_infinity();
  return ExtendedReal::finite(sin_like(kappa, lambda * r) / den);
}

/// tau^(lambda)_{K,N}(r) = lambda^{1/N} sigma^(lambda)_{K/(N-1)}(r)^{(N-1)/N}.
inline ExtendedReal tau(const CdParams& params, double lambda, double r) {
  if (params.N().is_infinite()) {
    throw Error(ErrorKind::kBadDimension, "tau is undefined for N = inf");
  }
  const double N = params.N().value();
  if (N == 0.0 || N == 1.0) {
    throw Error(ErrorKind::kBadDimension, "tau requires N not in {0, 1}");
  }
  const ExtendedReal s = sigma(*params.kappa_eff(), lambda, r);
  if (r == 0.0) return ExtendedReal::finite(lambda);
  if (s.is_infinite()) return s;
  return ExtendedReal::finite(std::pow(lambda, 1.0 / N) *
                              std::pow(s.value(), (N - 1.0) / N));
}

/// Checks tau^N = lambda sigma^{N-1} to 1e-12 relative accuracy.
inline bool tau_sigma_identity_check(const CdParams& params, double lambda,
                                     double r) {
  const ExtendedReal t = tau(params, lambda, r);
  const ExtendedReal s = sigma(*params.kappa_eff(), lambda, r);
  if (t.is_infinite() || s.is_infinite()) {
    throw Error(ErrorKind::kInvalidArgument,
                "identity check needs finite tau and sigma");
  }
  const double N = params.N().value();
  const double lhs = std::pow(t.value(), N);
  const double rhs = lambda * std::pow(s.value(), N - 1.0);
  const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
  return std::abs(lhs - rhs) <= 1e-12 * scale;
}

}  // namespace needle
