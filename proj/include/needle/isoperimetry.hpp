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

// Isoperimetric profile estimation on grid spaces, the lower bound
// I >= Lambda^{-1} I_{K,N,D}, and Brunn-Minkowski checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "needle/comparison.hpp"
#include "needle/core.hpp"
#include "needle/density.hpp"
#include "needle/localization.hpp"
#include "needle/model_profiles.hpp"
#include "needle/needle1d.hpp"
#include "needle/norms.hpp"
#include "needle/parallel.hpp"

namespace needle {

/// (m(B+(A, eps)) - m(A)) / eps with B+(A, eps) = {y : min_{x in A} d(x, y)
/// < eps}.
inline double forward_boundary(const FiniteAsymSpace& space,
                               const std::vector<std::size_t>& A, double eps) {
  if (!(eps > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "eps must be positive");
  }
  const std::size_t n = space.size();
  std::vector<char> inA(n, 0);
  for (std::size_t a : A) inA.at(a) = 1;
  if (A.empty()) return 0.0;
  double grown = 0.0;
  for (std::size_t y = 0; y < n; ++y) {
    if (inA[y]) continue;
    for (std::size_t x : A) {
      if (space.d(x, y) < eps) {
        grown += space.m(y);
        break;
      }
    }
  }
  return grown / eps;
}

/// Regular 1D (optionally periodic) or 2D cell grid with a translation
/// invariant hop stencil. Cell i of a 2D grid sits at column i % nx, row
/// i / nx.
class GridSpace {
 public:
  struct Hop {
    int dx;
    int dy;
    double cost;
    int linf;
  };

  /// spacing is the metric size of a unit step; cell_width is the side of
  /// a cell in the coordinates of centers.
  GridSpace(std::size_t nx, std::size_t ny, bool periodic,
            std::vector<double> mass, std::vector<Hop> hops, double spacing,
            double cell_width, std::vector<std::pair<double, double>> centers)
      : nx_(nx),
        ny_(ny),
        periodic_(periodic),
        mass_(std::move(mass)),
        hops_(std::move(hops)),
        spacing_(spacing),
        cell_width_(cell_width),
        centers_(std::move(centers)) {
    if (nx_ * ny_ != mass_.size() || centers_.size() != mass_.size()) {
      throw Error(ErrorKind::kInvalidSpace, "grid arrays disagree in size");
    }
    if (hops_.empty()) throw Error(ErrorKind::kInvalidSpace, "empty stencil");
    for (const Hop& h : hops_) {
      if (!(h.cost > 0.0) || h.linf < 1) {
        throw Error(ErrorKind::kInvalidSpace, "hop costs must be positive");
      }
    }
  }

  /// n equal cells on R/Z; a unit step costs D/n forward and D/(Lambda n)
  /// backward.
  static GridSpace circle(const CircleStructure& cs, std::size_t n) {
    if (n < 3) throw Error(ErrorKind::kInvalidArgument, "need n >= 3");
    const double nd = static_cast<double>(n);
    std::vector<std::pair<double, double>> centers(n);
    for (std::size_t i = 0; i < n; ++i) {
      centers[i] = {(static_cast<double>(i) + 0.5) / nd, 0.0};
    }
    std::vector<Hop> hops{{1, 0, cs.D / nd, 1},
                          {-1, 0, cs.D / (cs.Lambda * nd), 1}};
    return GridSpace(n, 1, true, std::vector<double>(n, 1.0 / nd),
                     std::move(hops), cs.D / nd, 1.0 / nd, std::move(centers));
  }

  /// n x n cells on [-half_width, half_width]^2 with masses proportional to
  /// weight(center) and normalized to 1; hops are the primitive offsets of
  /// sup-norm at most radius, priced by the norm.
  static GridSpace plane(const AsymmetricNorm& norm, std::size_t n,
                         double half_width,
                         const std::function<double(double, double)>& weight,
                         int radius) {
    if (norm.dim() != 2) {
      throw Error(ErrorKind::kInvalidArgument, "plane grid needs a 2D norm");
    }
    if (n < 2 || radius < 1 || !(half_width > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "bad grid parameters");
    }
    const double h = 2.0 * half_width / static_cast<double>(n);
    std::vector<double> mass(n * n);
    std::vector<std::pair<double, double>> centers(n * n);
    double total = 0.0;
    for (std::size_t iy = 0; iy < n; ++iy) {
      for (std::size_t ix = 0; ix < n; ++ix) {
        const double x = -half_width + (static_cast<double>(ix) + 0.5) * h;
        const double y = -half_width + (static_cast<double>(iy) + 0.5) * h;
        const double w = weight(x, y);
        if (!(w > 0.0) || !std::isfinite(w)) {
          throw Error(ErrorKind::kInvalidSpace, "weight must be positive");
        }
        centers[iy * n + ix] = {x, y};
        mass[iy * n + ix] = w;
        total += w;
      }
    }
    for (double& m : mass) m /= total;
    std::vector<Hop> hops;
    for (int dy = -radius; dy <= radius; ++dy) {
      for (int dx = -radius; dx <= radius; ++dx) {
        if (std::gcd(std::abs(dx), std::abs(dy)) != 1) continue;
        const double c = norm(Vec{dx * h, dy * h});
        hops.push_back({dx, dy, c, std::max(std::abs(dx), std::abs(dy))});
      }
    }
    return GridSpace(n, n, false, std::move(mass), std::move(hops), h, h,
                     std::move(centers));
  }

  std::size_t size() const { return mass_.size(); }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double spacing() const { return spacing_; }
  double cell_width() const { return cell_width_; }
  bool periodic() const { return periodic_; }
  double mass(std::size_t i) const { return mass_[i]; }
  const std::vector<Hop>& hops() const { return hops_; }
  const std::pair<double, double>& center(std::size_t i) const {
    return centers_[i];
  }

  /// Target of hop h from cell i, if it stays on the grid.
  std::optional<std::size_t> step(std::size_t i, const Hop& h) const {
    long x = static_cast<long>(i % nx_) + h.dx;
    long y = static_cast<long>(i / nx_) + h.dy;
    const long nx = static_cast<long>(nx_);
    const long ny = static_cast<long>(ny_);
    if (periodic_) {
      x = ((x % nx) + nx) % nx;
      y = ((y % ny) + ny) % ny;
    } else if (x < 0 || y < 0 || x >= nx || y >= ny) {
      return std::nullopt;
    }
    return static_cast<std::size_t>(y * nx + x);
  }

  /// Largest ratio of a hop cost to the cost of its reverse.
  double hop_asymmetry() const {
    double r = 1.0;
    for (const Hop& a : hops_) {
      for (const Hop& b : hops_) {
        if (a.dx == -b.dx && a.dy == -b.dy) r = std::max(r, a.cost / b.cost);
      }
    }
    return r;
  }

 private:
  std::size_t nx_;
  std::size_t ny_;
  bool periodic_;
  std::vector<double> mass_;
  std::vector<Hop> hops_;
  double spacing_;
  double cell_width_;
  std::vector<std::pair<double, double>> centers_;
};

/// Boundary quotients of one set at several eps.
struct BoundaryQuotients {
  std::vector<double> eps;
  std::vector<double> cell_centered;
  std::vector<double> raw;
  double extrapolated = 0.0;
};

namespace detail {

struct GridDistances {
  std::vector<double> dist;
  std::vector<double> crossing;  // length of the last hop inside its cell
  std::vector<std::size_t> reached;
};

// Multi-source forward Dijkstra out of A. With from_boundary the first hop
// is measured from the cell wall rather than the cell center.
inline GridDistances grid_dijkstra(const GridSpace& g,
                                   const std::vector<char>& inA,
                                   double cutoff, bool from_boundary) {
  const std::size_t n = g.size();
  GridDistances out;
  out.dist.assign(n, kInf);
  out.crossing.assign(n, 0.0);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  auto relax = [&](std::size_t v, double dv, double cross) {
    if (dv < out.dist[v] && dv <= cutoff) {
      out.dist[v] = dv;
      out.crossing[v] = cross;
      heap.emplace(dv, v);
    }
  };
  const std::size_t nx = g.nx();
  const bool two_d = g.ny() > 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!inA[i]) continue;
    bool edge = false;
    for (const auto& h : g.hops()) {
      if (h.linf != 1) continue;
      const auto j = g.step(i, h);
      if (!j) continue;
      if (!inA[*j]) {
        edge = true;
        break;
      }
    }
    if (!edge) {
      // Diagonal and longer hops only leave A from cells next to its wall.
      if (two_d) {
        const std::size_t x = i % nx;
        const std::size_t y = i / nx;
        for (int dy = -1; dy <= 1 && !edge; ++dy) {
          for (int dx = -1; dx <= 1 && !edge; ++dx) {
            const long xx = static_cast<long>(x) + dx;
            const long yy = static_cast<long>(y) + dy;
            if (xx < 0 || yy < 0 || xx >= static_cast<long>(nx) ||
                yy >= static_cast<long>(g.ny())) {
              continue;
            }
            if (!inA[static_cast<std::size_t>(yy) * nx +
                     static_cast<std::size_t>(xx)]) {
              edge = true;
            }
          }
        }
      }
      if (!edge) continue;
    }
    for (const auto& h : g.hops()) {
      const auto j = g.step(i, h);
      if (!j || inA[*j]) continue;
      const double first =
          from_boundary ? h.cost * (1.0 - 0.5 / h.linf) : h.cost;
      relax(*j, first, h.cost / h.linf);
    }
  }
  while (!heap.empty()) {
    const auto [du, u] = heap.top();
    heap.pop();
    if (du > out.dist[u]) continue;
    out.reached.push_back(u);
    for (const auto& h : g.hops()) {
      const auto j = g.step(u, h);
      if (!j || inA[*j]) continue;
      relax(*j, du + h.cost, h.cost / h.linf);
    }
  }
  return out;
}

// Intercept of the least-squares line through (x, y).
inline double linear_intercept(const std::vector<double>& x,
                               const std::vector<double>& y) {
  const double k = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / k;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / k;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) return my;
  return my - (sxy / sxx) * mx;
}

// Value at 0 of the polynomial through (x, y): repeated Richardson
// elimination of the O(x), O(x^2), ... terms.
inline double polynomial_at_zero(const std::vector<double>& x,
                                 const std::vector<double>& y) {
  double v = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double l = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j != i) l *= x[j] / (x[j] - x[i]);
    }
    v += l * y[i];
  }
  return v;
}

}  // namespace detail

/// Forward boundary quotients of A on a grid at each eps, by two estimators:
/// raw counts whole cells whose center is within eps; cell_centered credits
/// each cell with the fraction of its crossing length lying within eps of
/// the wall of A. extrapolated is the eps -> 0 intercept of a linear fit to
/// the cell-centered values.
inline BoundaryQuotients grid_forward_boundary(const GridSpace& g,
                                               const std::vector<char>& inA,
                                               const std::vector<double>& eps) {
  if (inA.size() != g.size()) {
    throw Error(ErrorKind::kInvalidArgument, "indicator has the wrong size");
  }
  if (eps.empty()) throw Error(ErrorKind::kInvalidArgument, "no eps given");
  for (double e : eps) {
    if (!(e > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "eps must be positive");
    }
  }
  const double emax = *std::max_element(eps.begin(), eps.end());
  double max_cross = 0.0;
  for (const auto& h : g.hops()) max_cross = std::max(max_cross, h.cost / h.linf);
  BoundaryQuotients q;
  q.eps = eps;
  const auto cc = detail::grid_dijkstra(g, inA, emax + max_cross, true);
  const auto raw = detail::grid_dijkstra(g, inA, emax, false);
  for (double e : eps) {
    double grown = 0.0;
    for (std::size_t j : cc.reached) {
      const double frac = std::clamp(
          (e - cc.dist[j]) / cc.crossing[j] + 0.5, 0.0, 1.0);
      grown += g.mass(j) * frac;
    }
    q.cell_centered.push_back(grown / e);
    double count = 0.0;
    const double strict = e * (1.0 - 1e-9);
    for (std::size_t j : raw.reached) {
      if (raw.dist[j] < strict) count += g.mass(j);
    }
    q.raw.push_back(count / e);
  }
  q.extrapolated = eps.size() >= 2
                       ? detail::linear_intercept(eps, q.cell_centered)
                       : q.cell_centered.front();
  return q;
}

/// A candidate family member: the sublevel sets {level <= c} of a level
/// function sampled at cell centers.
struct Candidate {
  std::string name;
  std::vector<double> level;
};

namespace detail {

// P(a + b1 U + b2 V < t) for U, V uniform on [-w/2, w/2].
inline double linear_cell_fraction(double t, double a, double b1, double b2,
                                   double w) {
  double p = std::abs(b1) * w;
  double q = std::abs(b2) * w;
  if (p < q) std::swap(p, q);
  const double x = t - a + 0.5 * (p + q);
  if (x <= 0.0) return 0.0;
  if (x >= p + q) return 1.0;
  if (q <= 1e-14 * p) return x / p;
  if (x < q) return x * x / (2.0 * p * q);
  if (x <= p) return (x - 0.5 * q) / p;
  const double y = p + q - x;
  return 1.0 - y * y / (2.0 * p * q);
}

// max over hops of <v, hop> / cost: the dual of the stencil norm.
inline double stencil_dual(const GridSpace& g, double vx, double vy) {
  double best = 0.0;
  const double w = g.cell_width();
  for (const auto& h : g.hops()) {
    best = std::max(best, (vx * h.dx + vy * h.dy) * w / h.cost);
  }
  return best;
}

// Central-difference gradient of a cell field in center coordinates;
// one-sided next to the grid edge or next to cells where use is false.
inline std::pair<double, double> cell_gradient(
    const GridSpace& g, const std::vector<double>& v, std::size_t i,
    const std::vector<char>* use = nullptr) {
  const double w = g.cell_width();
  auto axis = [&](int dx, int dy) {
    const GridSpace::Hop fwd{dx, dy, 1.0, 1};
    const GridSpace::Hop bwd{-dx, -dy, 1.0, 1};
    auto ok = [&](const std::optional<std::size_t>& j) {
      return j && (use == nullptr || (*use)[*j]) && std::isfinite(v[*j]);
    };
    const auto jp = g.step(i, fwd);
    const auto jm = g.step(i, bwd);
    if (ok(jp) && ok(jm)) return (v[*jp] - v[*jm]) / (2.0 * w);
    if (ok(jp)) return (v[*jp] - v[i]) / w;
    if (ok(jm)) return (v[i] - v[*jm]) / w;
    return 0.0;
  };
  return {axis(1, 0), g.ny() > 1 ? axis(0, 1) : 0.0};
}

// Per-cell linear model of the signed forward distance to {level <= c}
// near its interface: a + <b, z - center>.
struct LevelModel {
  std::vector<double> gx;
  std::vector<double> gy;
  std::vector<double> dual;  // stencil dual of the gradient
};

inline LevelModel level_model(const GridSpace& g,
                              const std::vector<double>& level) {
  LevelModel lm;
  const std::size_t n = g.size();
  lm.gx.resize(n);
  lm.gy.resize(n);
  lm.dual.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [gx, gy] = cell_gradient(g, level, i);
    lm.gx[i] = gx;
    lm.gy[i] = gy;
    lm.dual[i] = stencil_dual(g, gx, gy);
  }
  return lm;
}

// Cells of {level <= c} and its interface, with the fraction of each
// interface cell inside the set.
struct LevelCut {
  std::vector<char> inside;     // center in the set and not on the interface
  std::vector<char> interface;  // linear model used
  std::vector<double> inner;    // fraction inside, interface cells only
  double mass = 0.0;
};

inline LevelCut level_cut(const GridSpace& g, const std::vector<double>& level,
                          const LevelModel& lm, double c) {
  const std::size_t n = g.size();
  const double w = g.cell_width();
  LevelCut cut;
  cut.inside.assign(n, 0);
  cut.interface.assign(n, 0);
  cut.inner.assign(n, 0.0);
  const GridSpace::Hop axes[4] = {
      {1, 0, 1.0, 1}, {-1, 0, 1.0, 1}, {0, 1, 1.0, 1}, {0, -1, 1.0, 1}};
  for (std::size_t i = 0; i < n; ++i) {
    const double s = level[i] - c;
    bool near = false;
    if (lm.dual[i] > 0.0) {
      const double f = linear_cell_fraction(0.0, s, lm.gx[i], lm.gy[i], w);
      near = f > 0.0 && f < 1.0;
      for (const auto& h : axes) {
        if (near) break;
        const auto j = g.step(i, h);
        if (j && ((level[*j] - c <= 0.0) != (s <= 0.0))) near = true;
      }
      if (near) {
        cut.interface[i] = 1;
        cut.inner[i] = f;
        cut.mass += g.mass(i) * f;
        continue;
      }
    }
    if (s <= 0.0) {
      cut.inside[i] = 1;
      cut.mass += g.mass(i);
    }
  }
  return cut;
}

}  // namespace detail

/// Boundary quotients of a sublevel set of prescribed mass.
struct LevelSetBoundary {
  double level = 0.0;
  double mass = 0.0;
  std::vector<double> eps;
  std::vector<double> quotient;  // (m(B+(A, eps)) - m(A)) / eps
  double extrapolated = 0.0;     // Richardson limit through all eps
};

/// Treats {level <= c} as a set with a sub-cell interface: each interface
/// cell carries the linear model (level - c)/F*(grad level) of the signed
/// forward distance, where F* is the dual of the stencil norm, and the rest
/// of the exterior takes stencil Dijkstra distances from those cells. Cell
/// volumes within eps are integrated exactly under the linear models.
inline LevelSetBoundary level_set_boundary(const GridSpace& g,
                                           const std::vector<double>& level,
                                           double theta,
                                           const std::vector<double>& eps,
                                           double mass_tol = 1e-3,
                                           const std::string& name = "set") {
  if (level.size() != g.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "candidate " + name + " has the wrong size");
  }
  if (!(theta > 0.0 && theta < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "theta must lie in (0, 1)");
  }
  if (eps.empty()) throw Error(ErrorKind::kInvalidArgument, "no eps given");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) ||
        std::find(eps.begin(), eps.begin() + static_cast<long>(i), eps[i]) !=
            eps.begin() + static_cast<long>(i)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "eps values must be positive and distinct");
    }
  }
  const std::size_t n = g.size();
  const double w = g.cell_width();
  const detail::LevelModel lm = detail::level_model(g, level);
  const auto [lo_it, hi_it] = std::minmax_element(level.begin(), level.end());
  const double span = std::max(*hi_it - *lo_it, 1e-300);
  double lo = *lo_it - span;
  double hi = *hi_it + span;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * span; ++it) {
    const double mid = 0.5 * (lo + hi);
    (detail::level_cut(g, level, lm, mid).mass < theta ? lo : hi) = mid;
  }
  const double c = 0.5 * (lo + hi);
  const detail::LevelCut cut = detail::level_cut(g, level, lm, c);
  if (std::abs(cut.mass - theta) > mass_tol) {
    throw Error(ErrorKind::kMassUnreachable,
                "candidate " + name + " cannot attain the requested mass");
  }
  LevelSetBoundary out;
  out.level = c;
  out.mass = cut.mass;
  out.eps = eps;

  // Exterior cells inherit the linear model of the interface cell that
  // reaches them first, evaluated through the accumulated hop offset.
  const double emax = *std::max_element(eps.begin(), eps.end());
  double max_hop = 0.0;
  for (const auto& h : g.hops()) max_hop = std::max(max_hop, h.cost);
  const double cutoff = emax + 2.0 * max_hop;
  std::vector<double> dist(n, kInf);
  std::vector<double> a(n, kInf);
  std::vector<double> bx(n, 0.0);
  std::vector<double> by(n, 0.0);
  std::vector<std::size_t> origin(n, n);
  std::vector<std::pair<long, long>> offset(n, {0, 0});
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  for (std::size_t i = 0; i < n; ++i) {
    if (!cut.interface[i]) continue;
    a[i] = (level[i] - c) / lm.dual[i];
    bx[i] = lm.gx[i] / lm.dual[i];
    by[i] = lm.gy[i] / lm.dual[i];
    dist[i] = std::max(a[i], 0.0);
    origin[i] = i;
    heap.emplace(dist[i], i);
  }
  std::vector<std::size_t> exterior;
  while (!heap.empty()) {
    const auto [du, u] = heap.top();
    heap.pop();
    if (du > dist[u]) continue;
    if (!cut.interface[u]) exterior.push_back(u);
    for (const auto& h : g.hops()) {
      const auto j = g.step(u, h);
      if (!j || cut.inside[*j] || cut.interface[*j]) continue;
      const double dv = du + h.cost;
      if (dv < dist[*j] && dv <= cutoff) {
        dist[*j] = dv;
        origin[*j] = origin[u];
        offset[*j] = {offset[u].first + h.dx, offset[u].second + h.dy};
        heap.emplace(dv, *j);
      }
    }
  }
  for (std::size_t i : exterior) {
    const std::size_t o = origin[i];
    bx[i] = bx[o];
    by[i] = by[o];
    a[i] = a[o] + w * (bx[o] * static_cast<double>(offset[i].first) +
                       by[o] * static_cast<double>(offset[i].second));
  }
  for (double e : eps) {
    double grown = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!cut.interface[i]) continue;
      const double f =
          detail::linear_cell_fraction(e, a[i], bx[i], by[i], w);
      grown += g.mass(i) * std::max(0.0, f - cut.inner[i]);
    }
    for (std::size_t i : exterior) {
      const double f0 = detail::linear_cell_fraction(0.0, a[i], bx[i], by[i], w);
      const double f = detail::linear_cell_fraction(e, a[i], bx[i], by[i], w);
      grown += g.mass(i) * std::max(0.0, f - f0);
    }
    out.quotient.push_back(grown / e);
  }
  out.extrapolated = detail::polynomial_at_zero(eps, out.quotient);
  return out;
}

struct IsoProfileOptions {
  std::vector<double> eps_steps{3.0, 5.0, 8.0};  // multiples of spacing
  double mass_tol = 1e-3;
};

/// Family minimum per theta, with the winning candidate and the full table.
struct IsoProfile {
  Profile profile;
  std::vector<std::string> argmin;
  std::vector<std::string> candidates;
  std::vector<std::vector<double>> table;  // [theta][candidate]
  std::vector<double> eps;
};

inline IsoProfile estimate_profile(const GridSpace& g,
                                   const std::vector<Candidate>& candidates,
                                   const std::vector<double>& theta_grid,
                                   const IsoProfileOptions& opts = {}) {
  if (candidates.empty()) {
    throw Error(ErrorKind::kFamilyEmpty, "no candidate sets");
  }
  IsoProfile out;
  for (double s : opts.eps_steps) out.eps.push_back(s * g.spacing());
  const std::size_t nt = theta_grid.size();
  const std::size_t nc = candidates.size();
  out.table.assign(nt, std::vector<double>(nc, kInf));
  parallel_for(nt * nc, [&](std::size_t job) {
    const std::size_t t = job / nc;
    const std::size_t c = job % nc;
    out.table[t][c] =
        level_set_boundary(g, candidates[c].level, theta_grid[t], out.eps,
                           opts.mass_tol, candidates[c].name)
            .extrapolated;
  });
  out.profile.theta = theta_grid;
  out.profile.method = "candidate-family";
  for (const auto& c : candidates) out.candidates.push_back(c.name);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto it = std::min_element(out.table[t].begin(), out.table[t].end());
    out.profile.value.push_back(*it);
    out.argmin.push_back(
        candidates[static_cast<std::size_t>(it - out.table[t].begin())].name);
  }
  return out;
}

/// Arcs centered at 1/2 on the circle grid.
inline IsoProfile circle_profile(const CircleStructure& cs, std::size_t n,
                                 const std::vector<double>& theta_grid,
                                 const IsoProfileOptions& opts = {}) {
  const GridSpace g = GridSpace::circle(cs, n);
  Candidate arc{"arc", std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    arc.level[i] = std::abs(g.center(i).first - 0.5);
  }
  return estimate_profile(g, {arc}, theta_grid, opts);
}

/// Raw estimator error on the arc [0, theta) at a fixed absolute eps of
/// j0 forward steps of the coarsest grid, over successive refinements.
struct ConvergenceReport {
  std::vector<std::size_t> n;
  std::vector<double> estimate;
  std::vector<double> error;
  double eps = 0.0;
  double slope = 0.0;  // fitted order in the grid spacing
};

inline ConvergenceReport circle_convergence(const CircleStructure& cs,
                                            double theta,
                                            const std::vector<std::size_t>& ns,
                                            double j0 = 12.0) {
  if (ns.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "need at least two grids");
  }
  ConvergenceReport rep;
  rep.n = ns;
  rep.eps = j0 * cs.D / static_cast<double>(ns.front());
  const double exact = circle_boundary_rate(cs);
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t n : ns) {
    const GridSpace g = GridSpace::circle(cs, n);
    std::vector<char> inA(n, 0);
    const auto cells = static_cast<std::size_t>(
        std::llround(theta * static_cast<double>(n)));
    for (std::size_t i = 0; i < cells; ++i) inA[i] = 1;
    const auto q = grid_forward_boundary(g, inA, {rep.eps});
    rep.estimate.push_back(q.raw.front());
    rep.error.push_back(std::abs(q.raw.front() - exact));
    lx.push_back(std::log(1.0 / static_cast<double>(n)));
    ly.push_back(std::log(std::max(rep.error.back(), 1e-300)));
  }
  const double k = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / k;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / k;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  rep.slope = sxy / sxx;
  return rep;
}

/// Profile of a weighted asymmetric line, by the half-interval and interval
/// families.
inline Profile needle_profile(const NeedleDensity& rho, const AsymLine& line,
                              const std::vector<double>& theta_grid) {
  Profile p;
  p.theta = theta_grid;
  p.method = "needle";
  for (double th : theta_grid) p.value.push_back(profile_1d(rho, line, th).value);
  return p;
}

/// Lambda^{-1} I_{K,N,D}(theta).
inline std::vector<double> main_bound(const CdParams& params,
                                      const ExtendedReal& D, double Lambda,
                                      const std::vector<double>& theta_grid,
                                      const ModelProfileOptions& opts = {}) {
  if (!(Lambda >= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "Lambda must be >= 1");
  }
  const Profile model = model_profile({params, D, theta_grid}, opts);
  std::vector<double> out;
  for (double v : model.value) out.push_back(v / Lambda);
  return out;
}

/// The one-dimensional circle case, where the bound is (1 + Lambda)/D.
inline std::vector<double> circle_bound(const CircleStructure& cs,
                                        const std::vector<double>& theta_grid) {
  return std::vector<double>(theta_grid.size(), circle_boundary_rate(cs));
}

struct MainInequalityReport {
  std::vector<double> theta;
  std::vector<double> estimate;
  std::vector<double> bound;
  std::vector<double> margin;
  double tol_grid = 0.0;
  std::size_t violations = 0;
  double worst_margin = kInf;
};

inline MainInequalityReport verify_main_inequality(
    const Profile& estimate, const std::vector<double>& bound,
    double tol_grid) {
  if (bound.size() != estimate.value.size()) {
    throw Error(ErrorKind::kInvalidArgument, "bound and profile disagree");
  }
  MainInequalityReport r;
  r.theta = estimate.theta;
  r.estimate = estimate.value;
  r.bound = bound;
  r.tol_grid = tol_grid;
  for (std::size_t i = 0; i < bound.size(); ++i) {
    const double m = estimate.value[i] - bound[i];
    r.margin.push_back(m);
    r.worst_margin = std::min(r.worst_margin, m);
    if (m < -tol_grid) ++r.violations;
  }
  return r;
}

/// Randers-plane grid carrying the Gaussian weight exp(-K|x|^2/2).
struct RandersGaussianPlane {
  AsymmetricNorm norm;
  GridSpace grid;
  double K;
  double K_prime;  // K inf |v|^2/||v||^2
  double Lambda;
  double half_width;
};

inline RandersGaussianPlane randers_gaussian_plane(const Vec& b, double K,
                                                   std::size_t n = 300,
                                                   double half_width = 4.0,
                                                   int radius = 4) {
  if (!(K > 0.0)) throw Error(ErrorKind::kInvalidArgument, "K must be > 0");
  AsymmetricNorm norm = AsymmetricNorm::randers({{1.0, 0.0}, {0.0, 1.0}}, b);
  GridSpace grid = GridSpace::plane(
      norm, n, half_width,
      [K](double x, double y) { return std::exp(-0.5 * K * (x * x + y * y)); },
      radius);
  const double top = max_unit_norm(norm);
  const double lam = reversibility_constant(norm);
  return {std::move(norm), std::move(grid), K, K / (top * top), lam,
          half_width};
}

struct CandidateOptions {
  std::size_t half_spaces = 16;
  std::vector<std::pair<double, double>> ball_centers{
      {0.0, 0.0}, {1.5, 0.0}, {-1.5, 0.0}, {0.0, 1.5}, {0.0, -1.5}};
  std::size_t potentials = 4;   // directions of the sources used for phi
  std::size_t coarse = 20;      // coarse grid is coarse x coarse points
};

/// Half-spaces {<x, n> <= c}, forward balls {d(x0, .) <= r}, and sublevel
/// sets of transshipment potentials solved on a coarse subgrid and extended
/// by phi(y) = min_i (phi_i + d(x_i, y)).
inline std::vector<Candidate> plane_candidates(const GridSpace& g,
                                               const AsymmetricNorm& norm,
                                               const CandidateOptions& opts = {}) {
  std::vector<Candidate> out;
  const std::size_t n = g.size();
  for (std::size_t k = 0; k < opts.half_spaces; ++k) {
    const double a = 2.0 * kPi * static_cast<double>(k) /
                     static_cast<double>(opts.half_spaces);
    Candidate c{"half-space-" + std::to_string(k), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
      const auto [x, y] = g.center(i);
      c.level[i] = x * std::cos(a) + y * std::sin(a);
    }
    out.push_back(std::move(c));
  }
  for (std::size_t k = 0; k < opts.ball_centers.size(); ++k) {
    const auto [cx, cy] = opts.ball_centers[k];
    Candidate c{"ball-" + std::to_string(k), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
      const auto [x, y] = g.center(i);
      c.level[i] = norm(Vec{x - cx, y - cy});
    }
    out.push_back(std::move(c));
  }
  if (opts.potentials == 0) return out;
  const std::size_t side = g.nx();
  const std::size_t stride = std::max<std::size_t>(1, side / opts.coarse);
  std::vector<std::size_t> sub;
  for (std::size_t iy = stride / 2; iy < g.ny(); iy += stride) {
    for (std::size_t ix = stride / 2; ix < side; ix += stride) {
      sub.push_back(iy * side + ix);
    }
  }
  const std::size_t m = sub.size();
  std::vector<std::vector<double>> d(m, std::vector<double>(m, 0.0));
  std::vector<double> w(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    w[i] = g.mass(sub[i]);
    total += w[i];
  }
  for (double& v : w) v /= total;
  for (std::size_t i = 0; i < m; ++i) {
    const auto [xi, yi] = g.center(sub[i]);
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      const auto [xj, yj] = g.center(sub[j]);
      d[i][j] = norm(Vec{xj - xi, yj - yi});
    }
  }
  const FiniteAsymSpace coarse(std::move(d), w, true);
  std::vector<Candidate> pots(opts.potentials);
  parallel_for(opts.potentials, [&](std::size_t k) {
    const double a = 2.0 * kPi * static_cast<double>(k) /
                     static_cast<double>(opts.potentials);
    std::vector<char> src(m, 0);
    double ms = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto [x, y] = g.center(sub[i]);
      if (x * std::cos(a) + y * std::sin(a) <= 0.0) {
        src[i] = 1;
        ms += coarse.m(i);
      }
    }
    std::vector<double> f(m);
    for (std::size_t i = 0; i < m; ++i) f[i] = ms - (src[i] ? 1.0 : 0.0);
    const PotentialSolution sol = solve_potential(coarse, f);
    Candidate c{"potential-" + std::to_string(k), std::vector<double>(n)};
    for (std::size_t y = 0; y < n; ++y) {
      const auto [px, py] = g.center(y);
      double best = kInf;
      for (std::size_t i = 0; i < m; ++i) {
        const auto [xi, yi] = g.center(sub[i]);
        best = std::min(best, sol.phi[i] + norm(Vec{px - xi, py - yi}));
      }
      c.level[y] = best;
    }
    pots[k] = std::move(c);
  });
  for (auto& c : pots) out.push_back(std::move(c));
  return out;
}

/// One point of a Brunn-Minkowski check.
struct BmPoint {
  double lambda;
  double lhs;  // m(A_lambda)
  double rhs;
  double margin;
};

struct BmReport {
  std::vector<BmPoint> points;
  std::size_t violations = 0;
  double tolerance = 0.0;
};

/// lambda s_{-K}(d) / s_{-K}(lambda d), which is 0 past the conjugate
/// radius.
inline double bm_factor(double K, double lambda, double d) {
  const ExtendedReal s = sigma(-K, lambda, d);
  return s.is_infinite() ? 0.0 : lambda / s.value();
}

namespace detail {

inline void bm_record(BmReport& r, double lambda, double lhs, double rhs) {
  const double m = lhs - rhs;
  r.points.push_back({lambda, lhs, rhs, m});
  if (m < -r.tolerance) ++r.violations;
}

inline void check_lambda_grid(const std::vector<double>& grid) {
  for (double l : grid) {
    if (!(l > 0.0 && l < 1.0)) {
      throw Error(ErrorKind::kInvalidArgument, "lambda must lie in (0, 1)");
    }
  }
}

}  // namespace detail

/// Intervals A0, A1 of the line with measure m([a, b]) = measure(a, b);
/// A_lambda is the interval (1 - lambda) A0 + lambda A1.
inline BmReport check_brunn_minkowski_1d(
    const std::function<double(double, double)>& measure, double K,
    std::pair<double, double> A0, std::pair<double, double> A1,
    const std::vector<double>& lambda_grid, double tol = 1e-9) {
  detail::check_lambda_grid(lambda_grid);
  if (!(A0.first <= A0.second) || !(A1.first <= A1.second)) {
    throw Error(ErrorKind::kInvalidArgument, "interval with lo > hi");
  }
  const double dmin =
      std::max({0.0, A1.first - A0.second, A0.first - A1.second});
  const double dmax =
      std::max(std::abs(A1.second - A0.first), std::abs(A0.second - A1.first));
  const double m0 = measure(A0.first, A0.second);
  const double m1 = measure(A1.first, A1.second);
  BmReport r;
  r.tolerance = tol;
  for (double l : lambda_grid) {
    const double lo = (1.0 - l) * A0.first + l * A1.first;
    const double hi = (1.0 - l) * A0.second + l * A1.second;
    const double f0 =
        std::min(bm_factor(K, 1.0 - l, dmin), bm_factor(K, 1.0 - l, dmax));
    const double f1 = std::min(bm_factor(K, l, dmin), bm_factor(K, l, dmax));
    detail::bm_record(r, l, measure(lo, hi), std::min(f0 * m0, f1 * m1));
  }
  return r;
}

/// A_lambda is the set of points z on a geodesic from some x in A0 to some
/// y in A1 that minimize |d(x, z) - lambda d(x, y)|, found exhaustively.
/// The default tolerance is the largest point mass.
inline BmReport check_brunn_minkowski_discrete(
    const FiniteAsymSpace& space, double K, const std::vector<std::size_t>& A0,
    const std::vector<std::size_t>& A1, const std::vector<double>& lambda_grid,
    std::optional<double> tol = std::nullopt) {
  detail::check_lambda_grid(lambda_grid);
  if (A0.empty() || A1.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "sets must be nonempty");
  }
  const std::size_t n = space.size();
  BmReport r;
  r.tolerance = tol.value_or(
      *std::max_element(space.weights().begin(), space.weights().end()));
  double m0 = 0.0;
  double m1 = 0.0;
  for (std::size_t i : A0) m0 += space.m(i);
  for (std::size_t i : A1) m1 += space.m(i);
  const double geo_tol = 1e-12 * space.max_distance();
  for (double l : lambda_grid) {
    std::vector<char> mid(n, 0);
    double f0 = kInf;
    double f1 = kInf;
    for (std::size_t x : A0) {
      for (std::size_t y : A1) {
        const double dxy = space.d(x, y);
        f0 = std::min(f0, bm_factor(K, 1.0 - l, dxy));
        f1 = std::min(f1, bm_factor(K, l, dxy));
        const double target = l * dxy;
        double best = kInf;
        for (std::size_t z = 0; z < n; ++z) {
          if (space.d(x, z) + space.d(z, y) > dxy + geo_tol) continue;
          best = std::min(best, std::abs(space.d(x, z) - target));
        }
        for (std::size_t z = 0; z < n; ++z) {
          if (space.d(x, z) + space.d(z, y) > dxy + geo_tol) continue;
          if (std::abs(space.d(x, z) - target) <= best + geo_tol) mid[z] = 1;
        }
      }
    }
    double lhs = 0.0;
    for (std::size_t z = 0; z < n; ++z) {
      if (mid[z]) lhs += space.m(z);
    }
    detail::bm_record(r, l, lhs, std::min(f0 * m0, f1 * m1));
  }
  return r;
}

}  // namespace needle
