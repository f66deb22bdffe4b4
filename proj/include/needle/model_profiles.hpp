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

// Model isoperimetric profiles I_{K,N,D}: the sin-power and Gaussian closed
// forms, and a numerical infimum over model needle densities.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "needle/comparison.hpp"
#include "needle/core.hpp"
#include "needle/density.hpp"
#include "needle/needle1d.hpp"
#include "needle/numerics.hpp"
#include "needle/parallel.hpp"

namespace needle {

/// Profile values on a theta grid.
struct Profile {
  std::vector<double> theta;
  std::vector<double> value;
  std::string method;

  std::string to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "theta,value\n";
    for (std::size_t i = 0; i < theta.size(); ++i) {
      os << theta[i] << ',' << value[i] << '\n';
    }
    return os.str();
  }
};

/// Sin-power profile for K > 0, N > 1 and diameter bound at least
/// pi sqrt((N-1)/K).
inline double levy_gromov_profile(double K, double N, double theta) {
  if (!(K > 0.0) || !(N > 1.0) || !std::isfinite(N)) {
    throw Error(ErrorKind::kInvalidArgument,
                "sin-power profile needs K > 0 and finite N > 1");
  }
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "theta must lie in [0, 1]");
  }
  if (theta == 0.0 || theta == 1.0) return 0.0;
  const double q = std::sqrt(K / (N - 1.0));
  const double L = kPi / q;
  auto f = [&](double r) {
    const double s = std::sin(q * r);
    return s > 0.0 ? std::pow(s, N - 1.0) : 0.0;
  };
  const double tol = 1e-12;
  const double Z = numerics::adaptive_simpson(f, 0.0, L, tol, 64);
  // The density is symmetric about L/2.
  const double th = std::min(theta, 1.0 - theta);
  const double R = numerics::bisect_increasing(
      [&](double r) { return numerics::adaptive_simpson(f, 0.0, r, tol, 16) / Z; },
      th, 0.0, 0.5 * L, 1e-12 * L);
  return f(R) / Z;
}

/// Gaussian profile sqrt(K/2pi) exp(-K a^2/2), a = Phi^{-1}(theta)/sqrt(K).
inline double bakry_ledoux_profile(double K, double theta) {
  if (!(K > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "Gaussian profile needs K > 0");
  }
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "theta must lie in [0, 1]");
  }
  if (theta == 0.0 || theta == 1.0) return 0.0;
  const double a = numerics::normal_quantile(theta) / std::sqrt(K);
  return std::sqrt(K / (2.0 * kPi)) * std::exp(-0.5 * K * a * a);
}

struct ProfileSpec {
  CdParams params;
  ExtendedReal D;
  std::vector<double> theta_grid;
};

namespace detail {

// A model density on [lo, lo + len] drawn from a subfamily indexed by a
// position parameter.
struct ModelMember {
  int family;
  double pos;
  double len;
};

class ModelFamily {
 public:
  ModelFamily(const CdParams& params, double D) : params_(params), D_(D) {
    if (params.N().is_infinite()) {
      K_ = params.K();
      q_ = std::sqrt(std::abs(K_));
      return;
    }
    N_ = params.N().value();
    p_ = N_ - 1.0;
    kappa_ = *params.kappa_eff();
    q_ = std::sqrt(std::abs(kappa_));
  }

  bool infinite_n() const { return params_.N().is_infinite(); }

  // Subfamilies: 0 = sin / t+alpha / cosh / gaussian window,
  // 1 = sinh window, 2 = exponential window.
  std::vector<int> families() const {
    if (!infinite_n() && kappa_ < 0.0) return {0, 1, 2};
    return {0};
  }

  double max_len() const {
    if (!infinite_n() && kappa_ > 0.0) return std::min(D_, kPi / q_);
    return D_;
  }

  // Admissible position range for a given length.
  std::pair<double, double> pos_range(int fam, double len) const {
    if (infinite_n()) {
      if (K_ == 0.0) return {0.0, 40.0};  // slope times length
      const double spread = 8.0 / q_;
      return {-0.5 * len, std::max(-0.5 * len, spread)};
    }
    if (kappa_ > 0.0) {
      const double L = kPi / q_;
      const double slack = p_ < 0.0 ? 1e-3 * L : 0.0;
      return {slack, std::max(slack, L - len - slack)};
    }
    if (kappa_ == 0.0) return {p_ < 0.0 ? 1e-3 : 0.0, 1.0};  // s in [0,1]
    const double far = 12.0 / q_;
    if (fam == 0) return {-0.5 * len, far};
    if (fam == 1) return {p_ < 0.0 ? 1e-3 / q_ : 0.0, far};
    return {0.0, 0.0};
  }

  // Profile value of the member at each theta (half-intervals, reversible
  // line).
  std::vector<double> evaluate(const ModelMember& m,
                               const std::vector<double>& thetas,
                               std::size_t cells) const {
    std::vector<double> out(thetas.size(), kInf);
    try {
      const NeedleDensity rho = build(m, cells);
      Profile1dOptions opts;
      opts.half_intervals_only = true;
      for (std::size_t i = 0; i < thetas.size(); ++i) {
        out[i] = profile_1d(rho, AsymLine(1.0), thetas[i], opts).value;
      }
    } catch (const Error&) {
      // Members that fail to normalize are skipped.
    }
    return out;
  }

  NeedleDensity build(const ModelMember& m, std::size_t cells) const {
    NeedleDensity::Options opts;
    opts.cells = cells;
    if (infinite_n()) {
      if (!std::isfinite(m.len)) {
        return NeedleDensity(std::make_shared<GaussTiltShape>(K_, 0.0), -kInf,
                             kInf, opts);
      }
      if (K_ == 0.0) {
        const double beta = m.pos / m.len;
        return NeedleDensity(std::make_shared<GaussTiltShape>(0.0, beta), 0.0,
                             m.len, opts);
      }
      return NeedleDensity(std::make_shared<GaussTiltShape>(K_, 0.0), m.pos,
                           m.pos + m.len, opts);
    }
    if (kappa_ > 0.0) {
      return NeedleDensity(
          std::make_shared<JacobiPowerShape>(kappa_, 0.0, 1.0, 0.0, p_), m.pos,
          m.pos + m.len, opts);
    }
    if (kappa_ == 0.0) {
      if (m.pos >= 1.0) return NeedleDensity::uniform(0.0, m.len, opts);
      const double alpha = m.len * m.pos / (1.0 - m.pos);
      return NeedleDensity(
          std::make_shared<JacobiPowerShape>(0.0, alpha, 1.0, 0.0, p_), 0.0,
          m.len, opts);
    }
    if (m.family == 0) {
      return NeedleDensity(
          std::make_shared<JacobiPowerShape>(kappa_, 1.0, 0.0, 0.0, p_), m.pos,
          m.pos + m.len, opts);
    }
    if (m.family == 1) {
      return NeedleDensity(
          std::make_shared<JacobiPowerShape>(kappa_, 0.0, 1.0, 0.0, p_), m.pos,
          m.pos + m.len, opts);
    }
    // exp(q t) = cosh + sinh.
    return NeedleDensity(
        std::make_shared<JacobiPowerShape>(kappa_, 1.0, q_, 0.0, p_), 0.0,
        m.len, opts);
  }

 private:
  CdParams params_;
  double D_;
  double N_ = 0.0;
  double p_ = 0.0;
  double kappa_ = 0.0;
  double K_ = 0.0;
  double q_ = 0.0;
};

}  // namespace detail

struct ModelProfileOptions {
  std::size_t lengths = 10;
  std::size_t positions = 24;
  std::size_t cells = 800;
  std::size_t refine_cells = 20000;
  int refine_rounds = 3;
};

/// Pointwise infimum, over model densities on intervals of length <= D, of
/// the half-interval profile. Returns zeros for K <= 0 with D = inf.
inline Profile numerical_model_profile(const ProfileSpec& spec,
                                       const ModelProfileOptions& opts = {}) {
  const CdParams& params = spec.params;
  if (params.N().is_finite()) {
    const double N = params.N().value();
    if (N > 0.0 && N <= 1.0) {
      throw Error(ErrorKind::kFamilyEmpty, "no model family for N in (0, 1]");
    }
  }
  if (spec.D.is_finite() && !(spec.D.value() > 0.0)) {
    throw Error(ErrorKind::kFamilyEmpty, "diameter bound must be positive");
  }
  for (double th : spec.theta_grid) {
    if (!(th > 0.0 && th < 1.0)) {
      throw Error(ErrorKind::kInvalidArgument, "theta grid must lie in (0,1)");
    }
  }
  Profile prof;
  prof.theta = spec.theta_grid;
  prof.method = "numerical";
  const double K = params.K();
  if (K <= 0.0 && spec.D.is_infinite()) {
    prof.value.assign(spec.theta_grid.size(), 0.0);
    return prof;
  }

  double D = spec.D.as_double();
  bool full_gaussian = false;
  if (params.N().is_infinite() && std::isinf(D)) {
    full_gaussian = true;
    D = 16.0 / std::sqrt(K);
  } else if (std::isinf(D)) {
    // K > 0: finite N > 1 is bounded by the conjugate radius below; N <= 0
    // uses cosh-type windows whose tails are cut where they are negligible.
    const double p = std::abs(params.N().value() - 1.0);
    D = 60.0 / (std::max(p, 1e-3) * std::sqrt(std::abs(*params.kappa_eff())));
  }
  const detail::ModelFamily family(params, D);
  const double max_len = family.max_len();

  std::vector<detail::ModelMember> members;
  if (full_gaussian) members.push_back({0, 0.0, kInf});
  for (int fam : family.families()) {
    for (std::size_t li = 1; li <= opts.lengths; ++li) {
      const double len = max_len * static_cast<double>(li) / opts.lengths;
      const auto [a, b] = family.pos_range(fam, len);
      const std::size_t np = (b > a) ? opts.positions : 1;
      for (std::size_t pi = 0; pi < np; ++pi) {
        const double pos =
            np == 1 ? a : a + (b - a) * static_cast<double>(pi) / (np - 1);
        members.push_back({fam, pos, len});
      }
    }
  }
  const std::vector<double>& thetas = spec.theta_grid;
  std::vector<std::vector<double>> values(members.size());
  parallel_for(members.size(), [&](std::size_t i) {
    values[i] = family.evaluate(members[i], thetas, opts.cells);
  });

  prof.value.assign(thetas.size(), kInf);
  parallel_for(thetas.size(), [&](std::size_t ti) {
    const std::vector<double> one = {thetas[ti]};
    std::size_t arg = 0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (values[i][ti] < values[arg][ti]) arg = i;
    }
    detail::ModelMember best = members[arg];
    double best_val = family.evaluate(best, one, opts.refine_cells)[0];
    if (std::isfinite(best.len)) {
      auto eval = [&](const detail::ModelMember& m) {
        return family.evaluate(m, one, opts.cells)[0];
      };
      double pos_step = 0.0;
      {
        const auto [a, b] = family.pos_range(best.family, best.len);
        pos_step = (b - a) / std::max<std::size_t>(opts.positions - 1, 1);
      }
      double len_step = max_len / opts.lengths;
      for (int round = 0; round < opts.refine_rounds; ++round) {
        const auto [a, b] = family.pos_range(best.family, best.len);
        if (b > a) {
          const auto r = numerics::golden_minimize(
              [&](double pos) {
                return eval({best.family, pos, best.len});
              },
              std::max(a, best.pos - pos_step), std::min(b, best.pos + pos_step),
              1e-6 * (1.0 + std::abs(best.pos)));
          best.pos = r.first;
        }
        const auto r = numerics::golden_minimize(
            [&](double len) {
              const auto [la, lb] = family.pos_range(best.family, len);
              detail::ModelMember m{best.family, std::clamp(best.pos, la, lb),
                                    len};
              return eval(m);
            },
            std::max(1e-9 * max_len, best.len - len_step),
            std::min(max_len, best.len + len_step), 1e-6 * max_len);
        {
          const auto [la, lb] = family.pos_range(best.family, r.first);
          best = {best.family, std::clamp(best.pos, la, lb), r.first};
        }
        pos_step *= 0.5;
        len_step *= 0.5;
      }
      best_val = std::min(best_val,
                          family.evaluate(best, one, opts.refine_cells)[0]);
    }
    prof.value[ti] = best_val;
  });
  return prof;
}

/// Dispatches to the closed forms where they apply and to the numerical
/// family infimum otherwise.
inline Profile model_profile(const ProfileSpec& spec,
                             const ModelProfileOptions& opts = {}) {
  const CdParams& p = spec.params;
  Profile prof;
  prof.theta = spec.theta_grid;
  if (p.N().is_infinite() && spec.D.is_infinite() && p.K() > 0.0) {
    prof.method = "bakry-ledoux";
    for (double th : spec.theta_grid) {
      prof.value.push_back(bakry_ledoux_profile(p.K(), th));
    }
    return prof;
  }
  if (p.N().is_finite() && p.N().value() > 1.0 && p.K() > 0.0 &&
      spec.D.as_double() >= conjugate_radius(*p.kappa_eff())) {
    prof.method = "levy-gromov";
    for (double th : spec.theta_grid) {
      prof.value.push_back(levy_gromov_profile(p.K(), p.N().value(), th));
    }
    return prof;
  }
  return numerical_model_profile(spec, opts);
}

}  // namespace needle
