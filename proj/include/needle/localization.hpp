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

// Needle decomposition of finite asymmetric metric-measure spaces: the
// transshipment problem and its 1-Lipschitz dual potential, the tight set,
// transport rays, and the saturation machinery.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "needle/core.hpp"

namespace needle {

/// Finite point set with a dense asymmetric distance matrix and positive
/// weights.
class FiniteAsymSpace {
 public:
  FiniteAsymSpace(std::vector<std::vector<double>> d, std::vector<double> m,
                  bool repair = false,
                  std::vector<std::vector<double>> coords = {})
      : n_(m.size()), m_(std::move(m)), coords_(std::move(coords)) {
    if (n_ == 0 || d.size() != n_) {
      throw Error(ErrorKind::kInvalidSpace,
                  "distance matrix and weights disagree in size");
    }
    d_.resize(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i) {
      if (d[i].size() != n_) {
        throw Error(ErrorKind::kInvalidSpace, "distance matrix is not square");
      }
      if (!(m_[i] > 0.0) || !std::isfinite(m_[i])) {
        throw Error(ErrorKind::kInvalidSpace, "weights must be positive");
      }
      for (std::size_t j = 0; j < n_; ++j) {
        const double v = d[i][j];
        if (i == j ? v != 0.0 : !(v > 0.0) || !std::isfinite(v)) {
          throw Error(ErrorKind::kInvalidSpace,
                      "need d(i,i) = 0 and finite d(i,j) > 0 for i != j");
        }
        d_[i * n_ + j] = v;
      }
    }
    if (repair) {
      close_under_shortest_paths();
    } else {
      validate_triangle();
    }
  }

  std::size_t size() const { return n_; }
  double d(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  double m(std::size_t i) const { return m_[i]; }
  const std::vector<double>& weights() const { return m_; }
  const std::vector<std::vector<double>>& coords() const { return coords_; }

  double max_distance() const {
    return *std::max_element(d_.begin(), d_.end());
  }

  double total_mass() const {
    return std::accumulate(m_.begin(), m_.end(), 0.0);
  }

 private:
  void validate_triangle() const {
    const double tol = 1e-12 * max_distance();
    for (std::size_t k = 0; k < n_; ++k) {
      for (std::size_t i = 0; i < n_; ++i) {
        const double dik = d(i, k);
        for (std::size_t j = 0; j < n_; ++j) {
          if (d(i, j) > dik + d(k, j) + tol) {
            throw Error(ErrorKind::kInvalidSpace,
                        "ordered triangle inequality fails at (" +
                            std::to_string(i) + "," + std::to_string(k) + "," +
                            std::to_string(j) + ")");
          }
        }
      }
    }
  }

  void close_under_shortest_paths() {
    for (std::size_t k = 0; k < n_; ++k) {
      for (std::size_t i = 0; i < n_; ++i) {
        const double dik = d_[i * n_ + k];
        for (std::size_t j = 0; j < n_; ++j) {
          const double via = dik + d_[k * n_ + j];
          if (via < d_[i * n_ + j]) d_[i * n_ + j] = via;
        }
      }
    }
  }

  std::size_t n_;
  std::vector<double> d_;
  std::vector<double> m_;
  std::vector<std::vector<double>> coords_;
};

struct FlowArc {
  std::size_t from;
  std::size_t to;
  double amount;
};

/// Dual potential phi and optimal transshipment flow.
struct PotentialSolution {
  std::vector<double> phi;
  std::vector<FlowArc> flow;
  double objective = 0.0;       // sum flow * d
  double dual_objective = 0.0;  // sum f m phi
  double max_lipschitz_violation = 0.0;
  std::size_t augmentations = 0;
};

/// Maximizes sum f m phi over phi with phi(j) - phi(i) <= d(i, j), by
/// successive shortest paths on the complete digraph. Mass moves from f < 0
/// to f > 0, towards larger phi.
inline PotentialSolution solve_potential(const FiniteAsymSpace& space,
                                         const std::vector<double>& f,
                                         double gap_tol = 1e-7) {
  const std::size_t n = space.size();
  if (f.size() != n) {
    throw Error(ErrorKind::kInvalidArgument, "f has the wrong length");
  }
  std::vector<double> b(n);
  double sum = 0.0;
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    b[i] = f[i] * space.m(i);
    sum += b[i];
    abs_sum += std::abs(b[i]);
  }
  if (std::abs(sum) > 1e-12 * abs_sum) {
    throw Error(ErrorKind::kNotMeanZero, "sum of f m is not zero");
  }
  PotentialSolution sol;
  std::vector<double> pi(n, 0.0);
  if (abs_sum == 0.0) {
    sol.phi.assign(n, 0.0);
    return sol;
  }
  std::vector<double> excess(n);
  std::vector<double> deficit(n);
  for (std::size_t i = 0; i < n; ++i) {
    excess[i] = b[i] < 0.0 ? -b[i] : 0.0;
    deficit[i] = b[i] > 0.0 ? b[i] : 0.0;
  }
  // Absorb the rounding imbalance into the largest demand.
  {
    const double s = std::accumulate(excess.begin(), excess.end(), 0.0) -
                     std::accumulate(deficit.begin(), deficit.end(), 0.0);
    const std::size_t big = static_cast<std::size_t>(
        std::max_element(deficit.begin(), deficit.end()) - deficit.begin());
    deficit[big] += s;
  }
  const double eps_mass = 1e-15 * abs_sum;
  std::vector<double> x(n * n, 0.0);
  std::vector<double> dist(n);
  std::vector<std::size_t> pred(n);
  std::vector<char> done(n);
  const std::size_t kNone = static_cast<std::size_t>(-1);

  for (;;) {
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (excess[i] > eps_mass) any = true;
    }
    if (!any) break;
    // Multi-source Dijkstra on reduced costs.
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(pred.begin(), pred.end(), kNone);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (excess[i] > eps_mass) dist[i] = 0.0;
    }
    std::size_t target = kNone;
    for (std::size_t iter = 0; iter < n; ++iter) {
      std::size_t u = kNone;
      double best = kInf;
      for (std::size_t v = 0; v < n; ++v) {
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      }
      if (u == kNone) break;
      done[u] = 1;
      if (deficit[u] > eps_mass && target == kNone) {
        target = u;
        break;
      }
      for (std::size_t v = 0; v < n; ++v) {
        if (done[v] || v == u) continue;
        double c = space.d(u, v) + pi[u] - pi[v];
        if (x[v * n + u] > 0.0) {
          c = std::min(c, -space.d(v, u) + pi[u] - pi[v]);
        }
        if (c < 0.0) c = 0.0;
        if (dist[u] + c < dist[v]) {
          dist[v] = dist[u] + c;
          pred[v] = u;
        }
      }
    }
    if (target == kNone) {
      // Rounding residue left by the subtractions is not a real imbalance.
      const double left = std::accumulate(excess.begin(), excess.end(), 0.0);
      if (left <= 1e-12 * abs_sum) break;
      throw Error(ErrorKind::kNumericalDualityGap, "no augmenting path found");
    }
    const double dt = dist[target];
    for (std::size_t v = 0; v < n; ++v) pi[v] += std::min(dist[v], dt);
    // Bottleneck along the path.
    double amount = deficit[target];
    std::size_t v = target;
    while (pred[v] != kNone) {
      const std::size_t u = pred[v];
      const bool use_reverse =
          x[v * n + u] > 0.0 &&
          -space.d(v, u) + pi[u] - pi[v] <= space.d(u, v) + pi[u] - pi[v];
      if (use_reverse) amount = std::min(amount, x[v * n + u]);
      v = u;
    }
    amount = std::min(amount, excess[v]);
    const std::size_t source = v;
    v = target;
    while (pred[v] != kNone) {
      const std::size_t u = pred[v];
      const bool use_reverse =
          x[v * n + u] > 0.0 &&
          -space.d(v, u) + pi[u] - pi[v] <= space.d(u, v) + pi[u] - pi[v];
      if (use_reverse) {
        x[v * n + u] -= amount;
        if (x[v * n + u] < eps_mass) x[v * n + u] = 0.0;
      } else {
        x[u * n + v] += amount;
      }
      v = u;
    }
    excess[source] -= amount;
    deficit[target] -= amount;
    ++sol.augmentations;
  }

  const double base = pi[0];
  sol.phi.resize(n);
  for (std::size_t i = 0; i < n; ++i) sol.phi[i] = pi[i] - base;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = x[i * n + j];
      if (a > 0.0) {
        sol.flow.push_back({i, j, a});
        sol.objective += a * space.d(i, j);
      }
      if (i != j) {
        sol.max_lipschitz_violation =
            std::max(sol.max_lipschitz_violation,
                     sol.phi[j] - sol.phi[i] - space.d(i, j));
      }
    }
    sol.dual_objective += b[i] * sol.phi[i];
  }
  const double gap = std::abs(sol.objective - sol.dual_objective);
  if (gap > gap_tol * std::max(sol.objective, 1e-300)) {
    throw Error(ErrorKind::kNumericalDualityGap,
                "primal and dual objectives disagree");
  }
  return sol;
}

/// Default tightness tolerance 1e-7 max d.
inline double default_eps_tight(const FiniteAsymSpace& space) {
  return 1e-7 * space.max_distance();
}

/// Gamma_phi = {(i, j) : phi(j) - phi(i) = d(i, j)} and its skeleton, the
/// edges not split additively by a third point.
struct TightGraph {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::pair<std::size_t, std::size_t>> skeleton;
  std::vector<std::vector<std::size_t>> out;  // skeleton adjacency
  std::vector<std::vector<std::size_t>> in;
};

inline TightGraph tight_graph(const FiniteAsymSpace& space,
                              const std::vector<double>& phi,
                              double eps_tight) {
  const std::size_t n = space.size();
  TightGraph g;
  g.n = n;
  std::vector<std::vector<std::size_t>> full_out(n);
  std::vector<char> tight(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (std::abs(phi[j] - phi[i] - space.d(i, j)) <= eps_tight) {
        g.edges.emplace_back(i, j);
        full_out[i].push_back(j);
        tight[i * n + j] = 1;
      }
    }
  }
  g.out.assign(n, {});
  g.in.assign(n, {});
  for (const auto& [i, j] : g.edges) {
    bool split = false;
    for (std::size_t k : full_out[i]) {
      if (k == j || !tight[k * n + j]) continue;
      if (std::abs(space.d(i, j) - space.d(i, k) - space.d(k, j)) <=
          eps_tight) {
        split = true;
        break;
      }
    }
    if (!split) {
      g.skeleton.emplace_back(i, j);
      g.out[i].push_back(j);
      g.in[j].push_back(i);
    }
  }
  return g;
}

enum class PointClass { kD, kT, kBPlus, kBMinus };

struct Ray {
  std::vector<std::size_t> points;  // ordered along increasing phi
  std::vector<double> param;        // phi(x_p) - phi(x_0)
  double v_weight = 0.0;            // sum of T-point masses
  std::vector<double> mu;           // conditional weights per point (0 on B)
};

struct RayDecomposition {
  std::vector<Ray> rays;
  std::vector<PointClass> classes;
  std::vector<std::size_t> D_set;
  std::vector<std::size_t> T_set;
  std::vector<std::size_t> B_plus;
  std::vector<std::size_t> B_minus;
  double B_mass = 0.0;
};

/// Maximal chains of the skeleton and the D / T / B+ / B- partition.
inline RayDecomposition decompose(const FiniteAsymSpace& space,
                                  const std::vector<double>& phi,
                                  double eps_tight) {
  const TightGraph g = tight_graph(space, phi, eps_tight);
  const std::size_t n = space.size();
  RayDecomposition dec;
  dec.classes.assign(n, PointClass::kT);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t in = g.in[i].size();
    const std::size_t out = g.out[i].size();
    if (in == 0 && out == 0) {
      dec.classes[i] = PointClass::kD;
    } else if (in == 0 && out >= 2) {
      dec.classes[i] = PointClass::kBPlus;
    } else if (out == 0 && in >= 2) {
      dec.classes[i] = PointClass::kBMinus;
    } else if (in >= 1 && out >= 1 && (in > 1 || out > 1)) {
      throw Error(ErrorKind::kAmbiguousInterior,
                  "point " + std::to_string(i) +
                      " is interior to more than one maximal chain");
    }
  }
  auto is_b = [&](std::size_t i) {
    return dec.classes[i] == PointClass::kBPlus ||
           dec.classes[i] == PointClass::kBMinus;
  };
  // Every ray starts at a point with no incoming skeleton edge.
  for (std::size_t s = 0; s < n; ++s) {
    if (!g.in[s].empty() || g.out[s].empty()) continue;
    for (std::size_t first : g.out[s]) {
      Ray ray;
      ray.points.push_back(s);
      std::size_t v = first;
      for (;;) {
        ray.points.push_back(v);
        if (g.out[v].size() != 1 || is_b(v)) break;
        v = g.out[v].front();
      }
      const double phi0 = phi[ray.points.front()];
      for (std::size_t p : ray.points) {
        ray.param.push_back(phi[p] - phi0);
        if (!is_b(p)) ray.v_weight += space.m(p);
      }
      for (std::size_t p : ray.points) {
        ray.mu.push_back(is_b(p) || ray.v_weight == 0.0
                             ? 0.0
                             : space.m(p) / ray.v_weight);
      }
      dec.rays.push_back(std::move(ray));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    switch (dec.classes[i]) {
      case PointClass::kD: dec.D_set.push_back(i); break;
      case PointClass::kT: dec.T_set.push_back(i); break;
      case PointClass::kBPlus:
        dec.B_plus.push_back(i);
        dec.B_mass += space.m(i);
        break;
      case PointClass::kBMinus:
        dec.B_minus.push_back(i);
        dec.B_mass += space.m(i);
        break;
    }
  }
  return dec;
}

/// Largest |sum_gamma v mu - m| over T points; 0 means exact reconstruction.
inline double reconstruction_error(const FiniteAsymSpace& space,
                                   const RayDecomposition& dec) {
  std::vector<double> acc(space.size(), 0.0);
  for (const Ray& r : dec.rays) {
    for (std::size_t p = 0; p < r.points.size(); ++p) {
      acc[r.points[p]] += r.v_weight * r.mu[p];
    }
  }
  double err = 0.0;
  for (std::size_t i : dec.T_set) err = std::max(err, std::abs(acc[i] - space.m(i)));
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (dec.classes[i] != PointClass::kT) err = std::max(err, std::abs(acc[i]));
  }
  return err;
}

struct CyclicalReport {
  bool monotone = true;
  double worst = 0.0;  // most negative closed-walk excess, pairs may repeat
  std::size_t edges = 0;
};

/// Sum d(x_i, y_i)^p <= sum d(x_i, y_{i+1})^p over every cyclic
/// arrangement of at most max_subset pairs. An arrangement is a closed walk
/// on the tails x with step cost C(x, x') = min over pairs (x', y) of
/// d(x, y)^p - d(x', y)^p; a negative closed walk contains a negative simple
/// cycle, which uses distinct pairs, so enumerating walks is exact.
inline CyclicalReport check_cyclical_monotonicity(
    const FiniteAsymSpace& space,
    const std::vector<std::pair<std::size_t, std::size_t>>& edges, int power,
    std::size_t max_subset, double tol = 1e-9) {
  if (power != 1 && power != 2) {
    throw Error(ErrorKind::kInvalidArgument, "power must be 1 or 2");
  }
  if (max_subset < 2) {
    throw Error(ErrorKind::kInvalidArgument, "max_subset must be >= 2");
  }
  const std::size_t n = space.size();
  CyclicalReport rep;
  rep.edges = edges.size();
  auto dp = [&](std::size_t i, std::size_t j) {
    const double v = space.d(i, j);
    return power == 1 ? v : v * v;
  };
  std::vector<std::size_t> slot(n, n);
  std::vector<std::size_t> tails;
  for (const auto& [x, y] : edges) {
    if (x >= n || y >= n) {
      throw Error(ErrorKind::kInvalidArgument, "edge endpoint out of range");
    }
    if (slot[x] == n) {
      slot[x] = tails.size();
      tails.push_back(x);
    }
  }
  const std::size_t T = tails.size();
  std::vector<double> C(T * T, kInf);
  for (const auto& [x1, y] : edges) {
    const std::size_t b = slot[x1];
    const double own = dp(x1, y);
    for (std::size_t a = 0; a < T; ++a) {
      const double v = dp(tails[a], y) - own;
      if (v < C[a * T + b]) C[a * T + b] = v;
    }
  }
  std::vector<double> cur(T);
  std::vector<double> nxt(T);
  for (std::size_t s = 0; s < T; ++s) {
    for (std::size_t b = 0; b < T; ++b) cur[b] = C[s * T + b];
    for (std::size_t len = 2; len <= max_subset; ++len) {
      // Close the walk s -> ... -> b -> s.
      for (std::size_t b = 0; b < T; ++b) {
        const double c = cur[b] + C[b * T + s];
        if (c < rep.worst) rep.worst = c;
      }
      if (len == max_subset) break;
      std::fill(nxt.begin(), nxt.end(), kInf);
      for (std::size_t b = 0; b < T; ++b) {
        const double cb = cur[b];
        if (cb == kInf) continue;
        const double* row = &C[b * T];
        for (std::size_t c = 0; c < T; ++c) {
          const double v = cb + row[c];
          if (v < nxt[c]) nxt[c] = v;
        }
      }
      std::swap(cur, nxt);
    }
  }
  rep.monotone = rep.worst >= -tol;
  return rep;
}

/// Closure of A under tight pairs in both directions.
inline std::vector<std::size_t> saturate(const FiniteAsymSpace& space,
                                         const std::vector<double>& phi,
                                         const std::vector<std::size_t>& A,
                                         double eps_tight) {
  const std::size_t n = space.size();
  std::vector<char> in(n, 0);
  std::vector<std::size_t> stack;
  for (std::size_t a : A) {
    if (a >= n) throw Error(ErrorKind::kInvalidArgument, "point out of range");
    if (!in[a]) {
      in[a] = 1;
      stack.push_back(a);
    }
  }
  while (!stack.empty()) {
    const std::size_t x = stack.back();
    stack.pop_back();
    for (std::size_t y = 0; y < n; ++y) {
      if (in[y] || y == x) continue;
      const bool fwd = std::abs(phi[y] - phi[x] - space.d(x, y)) <= eps_tight;
      const bool bwd = std::abs(phi[x] - phi[y] - space.d(y, x)) <= eps_tight;
      if (fwd || bwd) {
        in[y] = 1;
        stack.push_back(y);
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (in[i]) out.push_back(i);
  }
  return out;
}

/// |sum_A f m| for a saturated set A.
inline double check_saturated_mean_zero(const FiniteAsymSpace& space,
                                        const std::vector<double>& phi,
                                        const std::vector<double>& f,
                                        const std::vector<std::size_t>& A,
                                        double eps_tight) {
  std::vector<std::size_t> sorted = A;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (saturate(space, phi, sorted, eps_tight) != sorted) {
    throw Error(ErrorKind::kNotSaturated, "set is not saturated");
  }
  double s = 0.0;
  for (std::size_t i : sorted) s += f[i] * space.m(i);
  return std::abs(s);
}

struct PerRayReport {
  double max_ray_residual = 0.0;  // max over rays of |sum f mu| v
  double D_residual = 0.0;        // max over D of |f| m
  double max_b_bound = 0.0;       // max over rays of sum of |f| m at B ends
  double max_excess = 0.0;        // max over rays of residual minus its bound
  std::size_t worst_ray = 0;
};

inline PerRayReport check_per_ray_mean_zero(const FiniteAsymSpace& space,
                                            const std::vector<double>& f,
                                            const RayDecomposition& dec) {
  PerRayReport rep;
  for (std::size_t r = 0; r < dec.rays.size(); ++r) {
    const Ray& ray = dec.rays[r];
    double s = 0.0;
    double bound = 0.0;
    for (std::size_t p = 0; p < ray.points.size(); ++p) {
      const std::size_t x = ray.points[p];
      s += f[x] * ray.mu[p];
      if (dec.classes[x] == PointClass::kBPlus ||
          dec.classes[x] == PointClass::kBMinus) {
        bound += std::abs(f[x]) * space.m(x);
      }
    }
    const double res = std::abs(s) * ray.v_weight;
    if (res > rep.max_ray_residual) {
      rep.max_ray_residual = res;
      rep.worst_ray = r;
    }
    rep.max_b_bound = std::max(rep.max_b_bound, bound);
    rep.max_excess = std::max(rep.max_excess, res - bound);
  }
  for (std::size_t i : dec.D_set) {
    rep.D_residual = std::max(rep.D_residual, std::abs(f[i]) * space.m(i));
  }
  return rep;
}

namespace detail {

// phi(y) + d(y, x) - phi(x), clamped at 0 and snapped to 0 when tight.
inline double slack(const FiniteAsymSpace& space, const std::vector<double>& phi,
                    std::size_t y, std::size_t x, double eps_tight) {
  if (x == y) return 0.0;
  const double s = phi[y] + space.d(y, x) - phi[x];
  return s <= eps_tight ? 0.0 : s;
}

}  // namespace detail

struct PhiDelta {
  std::vector<double> values;  // phi_delta
  std::vector<double> gap;     // phi - phi_delta as computed, in [0, delta]
};

/// phi_delta(x) = min_y {phi(y) + d(y, x) - delta chi_Z(y)}, evaluated as
/// phi(x) - max_y {delta chi_Z(y) - slack(y, x)}.
inline PhiDelta phi_delta(const FiniteAsymSpace& space,
                          const std::vector<double>& phi,
                          const std::vector<std::size_t>& Z, double delta,
                          std::optional<double> eps_tight = std::nullopt) {
  if (Z.empty()) throw Error(ErrorKind::kInvalidArgument, "Z must be nonempty");
  if (!(delta > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "delta must be positive");
  }
  const double eps = eps_tight.value_or(default_eps_tight(space));
  const std::size_t n = space.size();
  std::vector<char> inZ(n, 0);
  for (std::size_t z : Z) inZ.at(z) = 1;
  PhiDelta out;
  out.values.resize(n);
  out.gap.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    double g = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      const double v =
          (inZ[y] ? delta : 0.0) - detail::slack(space, phi, y, x, eps);
      if (v > g) g = v;
    }
    double v = phi[x] - g;
    // Rounding can leave phi - v one ulp above delta.
    while (phi[x] - v > delta) v = std::nextafter(v, kInf);
    out.values[x] = v;
    out.gap[x] = phi[x] - v;
  }
  return out;
}

/// Phi = (phi - phi_delta)/delta at delta = half the smallest positive slack
/// from Z: exactly 1 on Z and 0 outside S(Z).
inline std::vector<double> limit_indicator(
    const FiniteAsymSpace& space, const std::vector<double>& phi,
    const std::vector<std::size_t>& Z,
    std::optional<double> eps_tight = std::nullopt) {
  if (Z.empty()) throw Error(ErrorKind::kInvalidArgument, "Z must be nonempty");
  const double eps = eps_tight.value_or(default_eps_tight(space));
  const std::size_t n = space.size();
  double min_slack = kInf;
  for (std::size_t y : Z) {
    for (std::size_t x = 0; x < n; ++x) {
      const double s = detail::slack(space, phi, y, x, eps);
      if (s > 0.0) min_slack = std::min(min_slack, s);
    }
  }
  const double delta = std::isfinite(min_slack) ? 0.5 * min_slack : 1.0;
  std::vector<char> inZ(n, 0);
  for (std::size_t z : Z) inZ.at(z) = 1;
  std::vector<double> out(n);
  for (std::size_t x = 0; x < n; ++x) {
    double g = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      const double v =
          (inZ[y] ? 1.0 : 0.0) - detail::slack(space, phi, y, x, eps) / delta;
      if (v > g) g = v;
    }
    out[x] = g;
  }
  return out;
}

}  // namespace needle
