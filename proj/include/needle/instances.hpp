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

// Reference instances for the localization engine.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "needle/localization.hpp"

namespace needle {

struct LocalizationInstance {
  FiniteAsymSpace space;
  std::vector<double> f;
};

/// n equispaced points on [-1, 1] with uniform weights and |x - y|. f is -1
/// on |x| < 1/2 and a positive constant on |x| > 1/2, balanced so that
/// phi = |x| up to a constant is optimal. n must be 1 mod 4.
inline LocalizationInstance abs_value_instance(std::size_t n = 201) {
  if (n < 5 || n % 4 != 1) {
    throw Error(ErrorKind::kInvalidArgument, "point count must be 1 mod 4");
  }
  const std::size_t half = (n - 1) / 2;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = -1.0 + static_cast<double>(i) / static_cast<double>(half);
  }
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  std::vector<std::vector<double>> coords(n);
  for (std::size_t i = 0; i < n; ++i) {
    coords[i] = {x[i]};
    for (std::size_t j = 0; j < n; ++j) d[i][j] = std::abs(x[i] - x[j]);
  }
  // Exactly half/2 grid points sit at |x| = 1/2.
  const std::size_t q = half / 2;
  std::size_t inner = 0;
  std::size_t outer = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long k = static_cast<long>(i) - static_cast<long>(half);
    const std::size_t a = static_cast<std::size_t>(std::labs(k));
    if (a < q) ++inner;
    if (a > q) ++outer;
  }
  const double pos = static_cast<double>(inner) / static_cast<double>(outer);
  std::vector<double> f(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const long k = static_cast<long>(i) - static_cast<long>(half);
    const std::size_t a = static_cast<std::size_t>(std::labs(k));
    if (a < q) f[i] = -1.0;
    if (a > q) f[i] = pos;
  }
  std::vector<double> m(n, 1.0 / static_cast<double>(n));
  return {FiniteAsymSpace(std::move(d), std::move(m), false, std::move(coords)),
          std::move(f)};
}

/// Random asymmetric space: d(i, j) uniform in [1, 2] closed under shortest
/// paths, weights 0.5 + U[0, 1] normalized to unit mass, and f uniform in
/// [-1, 1] shifted to mean zero.
inline LocalizationInstance random_instance(std::size_t n,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) d[i][j] = 1.0 + u(rng);
    }
  }
  std::vector<double> m(n);
  double total = 0.0;
  for (double& w : m) {
    w = 0.5 + u(rng);
    total += w;
  }
  for (double& w : m) w /= total;
  std::vector<double> f(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = 2.0 * u(rng) - 1.0;
    mean += f[i] * m[i];
  }
  for (double& v : f) v -= mean;
  return {FiniteAsymSpace(std::move(d), std::move(m), true), std::move(f)};
}

/// n points on a circle of length D: a forward step costs D/n and a
/// backward step backward_factor D/n. Uniform weights.
inline FiniteAsymSpace circle_space(double D, double backward_factor,
                                    std::size_t n) {
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  const double h = D / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const std::size_t fwd = (j + n - i) % n;
      const std::size_t bwd = n - fwd;
      d[i][j] = std::min(h * static_cast<double>(fwd),
                         backward_factor * h * static_cast<double>(bwd));
    }
  }
  std::vector<double> m(n, 1.0 / static_cast<double>(n));
  return FiniteAsymSpace(std::move(d), std::move(m));
}

}  // namespace needle
