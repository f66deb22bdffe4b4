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

// Asymmetric Minkowski norms on R^n (n <= 3), their distances and
// reversibility constants, the weighted circle, and norm smoothing.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "needle/core.hpp"
#include "needle/numerics.hpp"

namespace needle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

namespace detail {

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double quad_form(const Mat& A, const Vec& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) s += x[i] * A[i][j] * x[j];
  }
  return s;
}

inline double euclid(const Vec& x) { return std::sqrt(dot(x, x)); }

// Cholesky factorization; returns false if A is not symmetric positive
// definite.
inline bool cholesky(const Mat& A, Mat& L) {
  const std::size_t n = A.size();
  L.assign(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (A[i].size() != n) return false;
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(A[i][j] - A[j][i]) > 1e-12 * (1.0 + std::abs(A[i][j]))) {
        return false;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = A[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      if (i == j) {
        if (!(s > 0.0)) return false;
        L[i][i] = std::sqrt(s);
      } else {
        L[i][j] = s / L[j][j];
      }
    }
  }
  return true;
}

// Solves A y = b given the Cholesky factor of A.
inline Vec cholesky_solve(const Mat& L, const Vec& b) {
  const std::size_t n = b.size();
  Vec y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= L[i][k] * y[k];
    y[i] = s / L[i][i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = y[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= L[k][i] * y[k];
    y[i] = s / L[i][i];
  }
  return y;
}

// Unnormalized bump exp(-1/(1-x^2)) on (-1,1).
inline double bump(double x) {
  const double q = 1.0 - x * x;
  return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

}  // namespace detail

/// A positively 1-homogeneous convex function on R^dim that is positive off
/// the origin. Immutable once constructed.
class AsymmetricNorm {
 public:
  enum class Form { kEuclidean, kRanders, kTable, kSmoothed };

  static AsymmetricNorm euclidean(Mat A) {
    AsymmetricNorm n(Form::kEuclidean, A.size());
    Mat L;
    if (A.empty() || A.size() > 3 || !detail::cholesky(A, L)) {
      throw Error(ErrorKind::kNotANorm,
                  "A must be a symmetric positive definite matrix of size <= 3");
    }
    n.A_ = std::move(A);
    return n;
  }

  static AsymmetricNorm identity(std::size_t dim) {
    Mat A(dim, Vec(dim, 0.0));
    for (std::size_t i = 0; i < dim; ++i) A[i][i] = 1.0;
    return euclidean(std::move(A));
  }

  /// sqrt(x^T A x) + b.x, admissible iff b^T A^{-1} b < 1.
  static AsymmetricNorm randers(Mat A, Vec b) {
    AsymmetricNorm n = euclidean(std::move(A));
    if (b.size() != n.dim_) {
      throw Error(ErrorKind::kNotANorm, "drift b has the wrong dimension");
    }
    Mat L;
    detail::cholesky(n.A_, L);
    const Vec y = detail::cholesky_solve(L, b);
    if (!(detail::dot(b, y) < 1.0)) {
      throw Error(ErrorKind::kNotANorm, "Randers drift violates b^T A^-1 b < 1");
    }
    n.form_ = Form::kRanders;
    n.b_ = std::move(b);
    return n;
  }

  /// Planar norm whose unit ball is the convex polygon with the given
  /// vertices (any order; the origin must be interior).
  static AsymmetricNorm polygon(std::vector<std::pair<double, double>> verts) {
    AsymmetricNorm n(Form::kTable, 2);
    if (verts.size() < 3) {
      throw Error(ErrorKind::kNotANorm, "a polygon needs at least 3 vertices");
    }
    for (const auto& [x, y] : verts) {
      if (!(std::hypot(x, y) > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
        throw Error(ErrorKind::kNotANorm, "polygon vertex at the origin");
      }
    }
    std::sort(verts.begin(), verts.end(), [](const auto& a, const auto& b) {
      return std::atan2(a.second, a.first) < std::atan2(b.second, b.first);
    });
    const std::size_t m = verts.size();
    double scale = 0.0;
    for (const auto& [x, y] : verts) scale = std::max(scale, std::hypot(x, y));
    for (std::size_t k = 0; k < m; ++k) {
      const auto& p = verts[k];
      const auto& q = verts[(k + 1) % m];
      const auto& r = verts[(k + 2) % m];
      // Origin strictly left of every edge and the boundary turns left.
      const double edge_origin = p.first * q.second - p.second * q.first;
      const double turn = (q.first - p.first) * (r.second - q.second) -
                          (q.second - p.second) * (r.first - q.first);
      if (!(edge_origin > 0.0) || turn < -1e-12 * scale * scale) {
        throw Error(ErrorKind::kNotANorm,
                    "samples are not in convex position around the origin");
      }
    }
    n.verts_ = std::move(verts);
    n.angles_.reserve(m);
    for (const auto& [x, y] : n.verts_) n.angles_.push_back(std::atan2(y, x));
    return n;
  }

  /// Table of norm values at `values.size()` equally spaced directions
  /// theta_k = 2 pi k / M. Interpolation is by the gauge of the polygon
  /// through the points u_k / value_k.
  static AsymmetricNorm table(const Vec& values) {
    const std::size_t m = values.size();
    std::vector<std::pair<double, double>> verts;
    verts.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
      if (!(values[k] > 0.0) || !std::isfinite(values[k])) {
        throw Error(ErrorKind::kNotANorm, "table values must be positive");
      }
      const double th = 2.0 * kPi * static_cast<double>(k) / m;
      verts.emplace_back(std::cos(th) / values[k], std::sin(th) / values[k]);
    }
    return polygon(std::move(verts));
  }

  /// Two-step smoothing with parameter delta: directional mollification
  /// followed by adding delta |x|^2 under the square root.
  static AsymmetricNorm smoothed(const AsymmetricNorm& base, double delta,
                                 int radial_nodes = 12, int angular_nodes = 48) {
    if (!(delta > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "delta must be positive");
    }
    AsymmetricNorm n(Form::kSmoothed, base.dim_);
    n.base_ = std::make_shared<AsymmetricNorm>(base);
    n.delta_ = delta;
    n.build_mollifier(radial_nodes, angular_nodes);
    return n;
  }

  std::size_t dim() const { return dim_; }
  Form form() const { return form_; }
  double delta() const { return delta_; }
  const Mat& A() const { return A_; }
  const Vec& b() const { return b_; }

  /// ||x||.
  double operator()(const Vec& x) const {
    if (x.size() != dim_) {
      throw Error(ErrorKind::kInvalidArgument, "vector dimension mismatch");
    }
    switch (form_) {
      case Form::kEuclidean:
        return std::sqrt(std::max(0.0, detail::quad_form(A_, x)));
      case Form::kRanders:
        return std::sqrt(std::max(0.0, detail::quad_form(A_, x))) +
               detail::dot(b_, x);
      case Form::kTable:
        return polygon_gauge(x[0], x[1]);
      case Form::kSmoothed:
        return smoothed_value(x);
    }
    return 0.0;
  }

  double evaluate(const Vec& x) const { return (*this)(x); }

  /// First step of the smoothing only, ||x||'_delta.
  double mollified_value(const Vec& x) const {
    if (form_ != Form::kSmoothed) return (*this)(x);
    const double r = detail::euclid(x);
    if (r == 0.0) return 0.0;
    const double scale = delta_ * r;
    double total = 0.0;
    Vec y(dim_);
    for (std::size_t q = 0; q < nodes_.size(); ++q) {
      for (std::size_t i = 0; i < dim_; ++i) {
        y[i] = x[i] - scale * nodes_[q][i];
      }
      total += weights_[q] * (*base_)(y);
    }
    return total;
  }

 private:
  AsymmetricNorm(Form form, std::size_t dim) : form_(form), dim_(dim) {}

  double polygon_gauge(double x, double y) const {
    if (x == 0.0 && y == 0.0) return 0.0;
    const double th = std::atan2(y, x);
    const std::size_t m = verts_.size();
    std::size_t hi = static_cast<std::size_t>(
        std::upper_bound(angles_.begin(), angles_.end(), th) - angles_.begin());
    const std::size_t k1 = hi % m;
    const std::size_t k0 = (hi + m - 1) % m;
    const auto& p = verts_[k0];
    const auto& q = verts_[k1];
    // x = a p + b q, gauge = a + b.
    const double det = p.first * q.second - p.second * q.first;
    const double a = (x * q.second - y * q.first) / det;
    const double b = (p.first * y - p.second * x) / det;
    return a + b;
  }

  double smoothed_value(const Vec& x) const {
    const double m = mollified_value(x);
    return std::sqrt(m * m + delta_ * detail::dot(x, x));
  }

  // Quadrature for the unit-mass bump on the unit ball. Nodes come in
  // antipodal pairs so the discrete mollifier has zero mean.
  void build_mollifier(int radial_nodes, int angular_nodes) {
    const numerics::GaussRule gl = numerics::gauss_legendre(radial_nodes);
    nodes_.clear();
    weights_.clear();
    if (dim_ == 1) {
      const numerics::GaussRule g1 = numerics::gauss_legendre(4 * radial_nodes);
      for (std::size_t i = 0; i < g1.nodes.size(); ++i) {
        nodes_.push_back({g1.nodes[i]});
        weights_.push_back(g1.weights[i] * detail::bump(g1.nodes[i]));
      }
    } else if (dim_ == 2) {
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double r = 0.5 * (gl.nodes[i] + 1.0);
        const double wr = 0.5 * gl.weights[i] * r * detail::bump(r);
        for (int k = 0; k < angular_nodes; ++k) {
          const double th = 2.0 * kPi * (k + 0.5) / angular_nodes;
          nodes_.push_back({r * std::cos(th), r * std::sin(th)});
          weights_.push_back(wr);
        }
      }
    } else {
      const numerics::GaussRule gz = numerics::gauss_legendre(angular_nodes / 4);
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double r = 0.5 * (gl.nodes[i] + 1.0);
        const double wr = 0.5 * gl.weights[i] * r * r * detail::bump(r);
        for (std::size_t j = 0; j < gz.nodes.size(); ++j) {
          const double z = gz.nodes[j];
          const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
          for (int k = 0; k < angular_nodes; ++k) {
            const double th = 2.0 * kPi * (k + 0.5) / angular_nodes;
            nodes_.push_back(
                {r * s * std::cos(th), r * s * std::sin(th), r * z});
            weights_.push_back(wr * gz.weights[j]);
          }
        }
      }
    }
    double total = 0.0;
    for (double w : weights_) total += w;
    for (double& w : weights_) w /= total;
  }

  Form form_;
  std::size_t dim_;
  Mat A_;
  Vec b_;
  std::vector<std::pair<double, double>> verts_;
  std::vector<double> angles_;
  std::shared_ptr<const AsymmetricNorm> base_;
  double delta_ = 0.0;
  std::vector<Vec> nodes_;
  std::vector<double> weights_;
};

/// d(x, y) = ||y - x||.
inline double asym_distance(const AsymmetricNorm& norm, const Vec& x,
                            const Vec& y) {
  Vec d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = y[i] - x[i];
  return norm(d);
}

/// Unit vectors used for sweeps: a uniform angle grid in 2D, a
/// latitude/longitude grid in 3D.
inline std::vector<Vec> sphere_directions(std::size_t dim, std::size_t count) {
  std::vector<Vec> dirs;
  if (dim == 1) {
    dirs = {{1.0}, {-1.0}};
  } else if (dim == 2) {
    dirs.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      const double th = 2.0 * kPi * static_cast<double>(k) / count;
      dirs.push_back({std::cos(th), std::sin(th)});
    }
  } else {
    // Fibonacci lattice.
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    dirs.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double ph = golden * static_cast<double>(k);
      dirs.push_back({r * std::cos(ph), r * std::sin(ph), z});
    }
  }
  return dirs;
}

namespace detail {

inline Vec spherical(std::size_t dim, double a, double b) {
  if (dim == 2) return {std::cos(a), std::sin(a)};
  return {std::sin(b) * std::cos(a), std::sin(b) * std::sin(a), std::cos(b)};
}

// Maximizes g over unit directions: grid sweep, then golden-section
// refinement of the best cell (coordinate-wise in 3D).
template <class G>
double sphere_sup(std::size_t dim, const G& g) {
  if (dim == 1) return std::max(g(Vec{1.0}), g(Vec{-1.0}));
  if (dim == 2) {
    const std::size_t m = 4096;
    double best = -kInf;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const double v = g(spherical(2, 2.0 * kPi * k / m, 0.0));
      if (v > best) {
        best = v;
        arg = k;
      }
    }
    const double step = 2.0 * kPi / m;
    const double center = step * static_cast<double>(arg);
    const auto [a, v] = numerics::golden_minimize(
        [&](double t) { return -g(spherical(2, t, 0.0)); }, center - step,
        center + step, 1e-12);
    return std::max(best, -v);
  }
  const std::size_t na = 256;
  const std::size_t nb = 128;
  double best = -kInf;
  double ba = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j <= nb; ++j) {
      const double a = 2.0 * kPi * i / na;
      const double b = kPi * j / nb;
      const double v = g(spherical(3, a, b));
      if (v > best) {
        best = v;
        ba = a;
        bb = b;
      }
    }
  }
  double sa = 2.0 * kPi / na;
  double sb = kPi / nb;
  for (int round = 0; round < 30; ++round) {
    auto ra = numerics::golden_minimize(
        [&](double t) { return -g(spherical(3, t, bb)); }, ba - sa, ba + sa,
        1e-13);
    if (-ra.second > best) {
      best = -ra.second;
      ba = ra.first;
    }
    auto rb = numerics::golden_minimize(
        [&](double t) { return -g(spherical(3, ba, t)); }, bb - sb, bb + sb,
        1e-13);
    if (-rb.second > best) {
      best = -rb.second;
      bb = rb.first;
    }
    sa *= 0.5;
    sb *= 0.5;
  }
  return best;
}

}  // namespace detail

/// Lambda = sup over unit directions of ||-v|| / ||v||.
inline double reversibility_constant(const AsymmetricNorm& norm) {
  const double lam = detail::sphere_sup(norm.dim(), [&](const Vec& v) {
    Vec w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = -v[i];
    return norm(w) / norm(v);
  });
  return std::max(1.0, lam);
}

/// sup over Euclidean-unit v of ||v||; inf |v|^2/||v||^2 is its inverse
/// square.
inline double max_unit_norm(const AsymmetricNorm& norm) {
  return detail::sphere_sup(norm.dim(), [&](const Vec& v) { return norm(v); });
}

/// Support function h(n) = sup { <v, n> : ||v|| <= 1 }, by direction sweep.
inline double support_function(const AsymmetricNorm& norm, const Vec& n) {
  return detail::sphere_sup(norm.dim(), [&](const Vec& v) {
    return detail::dot(v, n) / norm(v);
  });
}

struct SmoothNormResult {
  AsymmetricNorm norm;
  double delta;
  double max_ratio;   // max ||x||_eps / ||x|| over the sweep
  double min_ratio;   // min ||x||_eps / ||x|| over the sweep
  std::size_t sweep;  // number of directions checked
  double lambda;      // reversibility constant of the smoothed norm
};

/// Finds delta on the halving schedule 0.5, 0.25, ... such that
/// ||x|| <= ||x||_eps <= (1 + eps) ||x|| on a sweep of directions.
inline SmoothNormResult smooth_norm(const AsymmetricNorm& norm, double eps,
                                    std::size_t sweep = 10000,
                                    int max_halvings = 30) {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "eps must lie in (0, 1]");
  }
  if (norm.dim() == 1) sweep = 2;
  const std::vector<Vec> dirs = sphere_directions(norm.dim(), sweep);
  std::vector<double> base(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) base[i] = norm(dirs[i]);
  double delta = 0.5;
  for (int h = 0; h <= max_halvings; ++h, delta *= 0.5) {
    AsymmetricNorm s = AsymmetricNorm::smoothed(norm, delta);
    double lo = kInf;
    double hi = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < dirs.size() && ok; ++i) {
      const double r = s(dirs[i]) / base[i];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      ok = r >= 1.0 - 1e-12 && r <= 1.0 + eps;
    }
    if (ok) {
      const double lam = reversibility_constant(s);
      return {std::move(s), delta, hi, lo, dirs.size(), lam};
    }
  }
  throw Error(ErrorKind::kToleranceNotMet,
              "no delta on the halving schedule satisfies the sandwich");
}

/// Minimum over sampled points x on the unit sphere and unit w of the second
/// difference (F^2(x+hw) + F^2(x-hw) - 2F^2(x)) / h^2.
inline double strong_convexity_probe(const AsymmetricNorm& norm,
                                     std::size_t samples = 720,
                                     double h = 1e-3) {
  const std::vector<Vec> dirs = sphere_directions(norm.dim(), samples);
  const std::vector<Vec> ws = sphere_directions(norm.dim(), 16);
  double worst = kInf;
  for (const Vec& x : dirs) {
    const double f0 = norm(x);
    for (const Vec& w : ws) {
      Vec p(x.size());
      Vec m(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        p[i] = x[i] + h * w[i];
        m[i] = x[i] - h * w[i];
      }
      const double fp = norm(p);
      const double fm = norm(m);
      worst = std::min(worst, (fp * fp + fm * fm - 2.0 * f0 * f0) / (h * h));
    }
  }
  return worst;
}

/// The circle R/Z with forward speed D and backward speed D/Lambda.
struct CircleStructure {
  double D;
  double Lambda;

  CircleStructure(double D_, double Lambda_) : D(D_), Lambda(Lambda_) {
    if (!(D > 0.0) || !std::isfinite(D)) {
      throw Error(ErrorKind::kInvalidArgument, "D must be positive and finite");
    }
    if (!(Lambda >= 1.0) || !std::isfinite(Lambda)) {
      throw Error(ErrorKind::kInvalidArgument, "Lambda must be >= 1");
    }
  }

  double forward_speed() const { return D; }
  double backward_speed() const { return D / Lambda; }
};

/// (1 + Lambda) / D.
inline double circle_boundary_rate(const CircleStructure& cs) {
  return (1.0 + cs.Lambda) / cs.D;
}

}  // namespace needle
