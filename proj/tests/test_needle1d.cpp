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

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "needle/needle1d.hpp"

namespace needle {
namespace {

CdParams P(double K, double N) { return CdParams(K, Dimension::finite(N)); }
CdParams Pinf(double K) { return CdParams(K, Dimension::infinity()); }

NeedleDensity truncated_gaussian(double a, double b) {
  return NeedleDensity(std::make_shared<GaussTiltShape>(1.0, 0.0), a, b);
}

TEST(CdDensity, UniformIsEqualityForAllDimensions) {
  const auto u = NeedleDensity::uniform(0.0, 1.0);
  for (Dimension N : {Dimension::finite(-2.0), Dimension::finite(0.0),
                      Dimension::finite(3.0), Dimension::infinity()}) {
    const auto r = check_cd_density(u, CdParams(0.0, N), 10000);
    EXPECT_EQ(r.violations, 0u) << N.to_string();
    EXPECT_LE(r.max_abs_margin, 1e-12);
    EXPECT_EQ(r.seed, kDefaultSeed);
  }
}

TEST(CdDensity, GaussianAndSinPowerEquality) {
  const auto g = check_cd_density(NeedleDensity::gaussian(1.0), Pinf(1.0));
  EXPECT_EQ(g.violations, 0u);
  EXPECT_LE(g.max_abs_margin, 1e-8);
  const auto s = check_cd_density(NeedleDensity::sin_power(2.0, 3.0), P(2, 3));
  EXPECT_EQ(s.violations, 0u);
  EXPECT_LE(s.max_abs_margin, 1e-8);
}

TEST(CdDensity, SharpnessFlip) {
  const auto s =
      check_cd_density(NeedleDensity::sin_power(2.0, 3.0), P(2.5, 3.0));
  EXPECT_GT(s.violations, 0u);
  EXPECT_LT(s.worst_margin, 0.0);
}

TEST(CdDensity, PassingImpliesPassingForSmallerK) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto g = NeedleDensity::gaussian(2.0, 0.3);
  const auto s = NeedleDensity::sin_power(3.0, 4.0);
  for (int i = 0; i < 20; ++i) {
    const double drop = 3.0 * u(rng);
    EXPECT_EQ(check_cd_density(g, Pinf(2.0 - drop), 500).violations, 0u);
    EXPECT_EQ(check_cd_density(s, P(3.0 - drop, 4.0), 500).violations, 0u);
  }
}

TEST(CdDensity, InfiniteBracketIsVacuous) {
  const auto u = NeedleDensity::uniform(0.0, 10.0);
  const auto r = check_cd_density(u, P(2.0, 3.0), 2000);
  EXPECT_GT(r.vacuous, 0u);
}

TEST(McpRatio, UniformHolds) {
  const auto r = check_mcp_ratio(NeedleDensity::uniform(0.0, 1.0), P(0, 3));
  EXPECT_EQ(r.violations, 0u);
  EXPECT_GT(r.trials, 900u);
}

TEST(McpRatio, SinSquaredIsEqualityOnBothSides) {
  const auto r = check_mcp_ratio(NeedleDensity::sin_power(2.0, 3.0), P(2, 3),
                                 1000, kDefaultSeed, 1e-9,
                                 std::pair{0.0, kPi});
  EXPECT_EQ(r.violations, 0u);
  EXPECT_LE(std::max(std::abs(r.min_lower_gap), std::abs(r.max_lower_gap)),
            1e-8);
  EXPECT_LE(std::max(std::abs(r.min_upper_gap), std::abs(r.max_upper_gap)),
            1e-8);
}

TEST(McpRatio, TruncatedGaussianViolatesFlatBound) {
  // At s = 1.2, t = 1.8 on [-3, 3] the density ratio exp(-0.9) is below the
  // lower bound ((3 - 1.8)/(3 - 1.2))^2 = 4/9.
  EXPECT_LT(std::exp(-0.9), 4.0 / 9.0);
  const auto r = check_mcp_ratio(truncated_gaussian(-3.0, 3.0), P(0, 3));
  EXPECT_GT(r.violations, 0u);
  EXPECT_THROW(check_mcp_ratio(truncated_gaussian(-3.0, 3.0), Pinf(0.0)),
               Error);
}

TEST(DifferentialForm, ClosedFormEqualities) {
  const auto g = check_differential_form(NeedleDensity::gaussian(1.0),
                                         Pinf(1.0));
  EXPECT_EQ(g.violations, 0u);
  EXPECT_LE(g.max_abs_margin, 1e-9);
  const auto e = check_differential_form(
      NeedleDensity::exp_tilt(-1.0, 0.0, kInf), Pinf(0.0));
  EXPECT_EQ(e.violations, 0u);
  EXPECT_LE(e.max_abs_margin, 1e-9);
}

TEST(DifferentialForm, SinPowerByFiniteDifferences) {
  // No closed-form derivatives: the check falls back to central differences.
  auto shape = std::make_shared<FunctionShape>(
      [](double t) { return 2.0 * std::log(std::sin(t)); },
      nullptr, 1.5, "sin-squared");
  NeedleDensity rho(shape, 0.0, kPi);
  rho.set_cd_region(0.5, kPi - 0.5);
  const auto r = check_differential_form(rho, P(2.0, 3.0));
  EXPECT_EQ(r.violations, 0u);
  EXPECT_LE(r.max_abs_margin, 1e-6);
}

TEST(DifferentialForm, SampledDensityIsRejected) {
  const auto s = NeedleDensity::sampled({0.0, 1.0, 2.0}, {1.0, 2.0, 1.0});
  try {
    check_differential_form(s, P(0, 3));
    FAIL() << "expected NonSmoothDensity";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonSmoothDensity);
  }
}

TEST(Mollify, ConstantIsUnchangedInside) {
  const auto u = NeedleDensity::uniform(0.0, 1.0);
  for (double N : {3.0, -2.0, 0.0}) {
    const auto m = mollify(u, P(0.0, N), 0.01);
    for (double t = 0.02; t <= 0.98; t += 0.01) {
      EXPECT_NEAR(m.shape->log_value(t), 0.0, 1e-12) << N << ' ' << t;
    }
  }
}

TEST(Mollify, GaussianKeepsDifferentialForm) {
  const auto m = mollify(NeedleDensity::gaussian(1.0), Pinf(1.0), 0.05);
  const auto r = check_differential_form(m.density, Pinf(1.0 - 1e-3));
  EXPECT_EQ(r.violations, 0u);
  EXPECT_NEAR(m.density.quadrature_mass(), 1.0, 1e-9);
}

TEST(Mollify, SinPowerKeepsDensityBound) {
  const auto m = mollify(NeedleDensity::sin_power(2.0, 3.0), P(2, 3), 0.01);
  EXPECT_EQ(check_cd_density(m.density, P(2, 3), 4000).violations, 0u);
  EXPECT_EQ(check_differential_form(m.density, P(2.0 - 1e-3, 3)).violations,
            0u);
}

TEST(Mollify, HarmonicBranchKeepsCd0) {
  const auto base = NeedleDensity::exp_tilt(1.0, 0.0, 2.0);
  ASSERT_EQ(check_cd_density(base, P(1.0, 0.0), 2000).violations, 0u);
  const auto m = mollify(base, P(1.0, 0.0), 0.05);
  EXPECT_EQ(check_cd_density(m.density, P(1.0, 0.0), 4000).violations, 0u);
}

TEST(Mollify, RejectsBadEps) {
  EXPECT_THROW(mollify(NeedleDensity::uniform(0.0, 1.0), P(0, 3), 0.0),
               Error);
}

TEST(Interpolate, IdentityAndTranslation) {
  const auto g0 = NeedleDensity::gaussian(1.0);
  const auto same = displacement_interpolate(g0, g0, 0.4);
  EXPECT_NEAR(same.w2, 0.0, 1e-12);
  for (double x : {-1.0, 0.0, 0.7}) {
    EXPECT_NEAR(same.density.pdf(x), g0.pdf(x), 1e-6);
  }
  const double m = 1.7;
  const auto g1 = NeedleDensity::gaussian(1.0, m);
  const auto mid = displacement_interpolate(g0, g1, 0.3);
  EXPECT_NEAR(mid.w2, m, 1e-6);
  for (double x : {-1.0, 0.2, 0.51, 1.5}) {
    const double z = x - 0.3 * m;
    EXPECT_NEAR(mid.density.pdf(x), std::exp(-0.5 * z * z) / std::sqrt(2 * kPi),
                1e-6);
  }
  const auto u = displacement_interpolate(NeedleDensity::uniform(0.0, 1.0),
                                          NeedleDensity::uniform(1.0, 2.0),
                                          0.5);
  EXPECT_NEAR(u.density.lo(), 0.5, 1e-9);
  EXPECT_NEAR(u.density.hi(), 1.5, 1e-9);
  EXPECT_NEAR(u.density.pdf(1.0), 1.0, 1e-9);
}

TEST(Interpolate, EndpointsAndGeodesicProperty) {
  const auto a = NeedleDensity::gaussian(2.0, -0.5);
  const auto b = NeedleDensity::sin_power(2.0, 3.0);
  const auto at0 = displacement_interpolate(a, b, 0.0);
  const auto at1 = displacement_interpolate(a, b, 1.0);
  for (double x : {-0.6, 0.0}) EXPECT_NEAR(at0.density.pdf(x), a.pdf(x), 1e-6);
  for (double x : {0.5, 1.5, 2.5}) {
    EXPECT_NEAR(at1.density.pdf(x), b.pdf(x), 1e-6);
  }
  const double w = at0.w2;
  const auto m1 = displacement_interpolate(a, b, 0.25);
  const auto m2 = displacement_interpolate(a, b, 0.75);
  const auto seg = displacement_interpolate(m1.density, m2.density, 0.5);
  EXPECT_NEAR(seg.w2, 0.5 * w, 1e-6);
}

TEST(EntropyConvexity, GaussianReferenceTranslates) {
  const auto r = check_entropy_convexity(
      NeedleDensity::gaussian(1.0, -1.0), NeedleDensity::gaussian(1.0, 1.5),
      Pinf(1.0), {0.1, 0.3, 0.5, 0.7, 0.9},
      [](double x) { return 0.5 * x * x; });
  EXPECT_EQ(r.violations, 0u);
  for (const auto& p : r.points) EXPECT_NEAR(p.margin, 0.0, 1e-6);
}

TEST(EntropyConvexity, EssSupBranchTranslation) {
  const auto r = check_entropy_convexity(
      NeedleDensity::uniform(0.0, 1.0), NeedleDensity::uniform(2.0, 3.0),
      P(0.0, 0.0), {0.2, 0.5, 0.8}, [](double) { return 0.0; });
  EXPECT_EQ(r.violations, 0u);
  for (const auto& p : r.points) {
    EXPECT_NEAR(p.lhs, 1.0, 1e-9);
    EXPECT_NEAR(p.rhs, 1.0, 1e-9);
  }
}

TEST(EntropyConvexity, RenyiBranchAgainstQuadrature) {
  const auto r = check_entropy_convexity(
      NeedleDensity::uniform(0.0, 1.0), NeedleDensity::uniform(0.0, 3.0),
      P(0.0, 2.0), {0.25, 0.5, 0.75}, [](double) { return 0.0; });
  EXPECT_EQ(r.violations, 0u);
  for (const auto& p : r.points) {
    // mu_l is uniform on [0, 1 + 2l]: S_2 = -sqrt(1 + 2l); the right side is
    // -(1 - l) - l sqrt(3).
    const double l = p.lambda;
    EXPECT_NEAR(p.lhs, -std::sqrt(1.0 + 2.0 * l), 1e-6);
    EXPECT_NEAR(p.rhs, -(1.0 - l) - l * std::sqrt(3.0), 1e-6);
  }
}

TEST(Profile1d, Examples) {
  const auto u = NeedleDensity::uniform(0.0, 1.0);
  EXPECT_NEAR(profile_1d(u, AsymLine(1.0), 0.3).value, 1.0, 1e-12);
  EXPECT_NEAR(profile_1d(u, AsymLine(2.0), 0.3).value, 0.5, 1e-12);
  EXPECT_NEAR(profile_1d(NeedleDensity::gaussian(1.0), AsymLine(1.0), 0.5)
                  .value,
              0.3989423, 1e-7);
}

TEST(Profile1d, LambdaComparison) {
  const std::vector<NeedleDensity> ds = {NeedleDensity::gaussian(1.0),
                                         NeedleDensity::sin_power(2.0, 3.0),
                                         NeedleDensity::exp_tilt(1.0, 0, 2)};
  for (const auto& d : ds) {
    for (double lb : {0.25, 0.5, 2.0, 3.0}) {
      const AsymLine line(lb);
      for (double th = 0.05; th < 0.96; th += 0.15) {
        Profile1dOptions o;
        o.scan = 2000;
        const double asym = profile_1d(d, line, th, o).value;
        const double sym = profile_1d(d, AsymLine(1.0), th, o).value;
        EXPECT_GE(asym, sym / std::max(lb, 1.0) - 1e-12);
      }
    }
  }
}

TEST(BoundaryMeasure1d, Examples) {
  const auto u = NeedleDensity::uniform(0.0, 1.0);
  EXPECT_NEAR(boundary_measure_1d(u, AsymLine(1.0), {{0.2, 0.5}}), 2.0, 1e-12);
  EXPECT_NEAR(boundary_measure_1d(u, AsymLine(1.0), {{0.0, 1.0}}), 0.0, 1e-15);
  EXPECT_NEAR(boundary_measure_1d(u, AsymLine(4.0), {{0.5, 1.0}}), 0.25,
              1e-12);
  EXPECT_NEAR(boundary_measure_1d(u, AsymLine(1.0), {{0.1, 0.3}, {0.3, 0.6}}),
              2.0, 1e-12);
  try {
    boundary_measure_1d(u, AsymLine(1.0), {{0.1, 0.4}, {0.3, 0.6}});
    FAIL() << "expected OverlappingIntervals";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kOverlappingIntervals);
  }
}

TEST(BoundaryMeasure1d, MatchesDifferenceQuotient) {
  const auto u = NeedleDensity::uniform(0.0, 1.0);
  const double lb = 2.5;
  const double eps = 1e-6;
  // B+([0.2, 0.5], eps) = (0.2 - eps/lb, 0.5 + eps).
  const double quotient = ((0.5 + eps) - (0.2 - eps / lb) - 0.3) / eps;
  EXPECT_NEAR(boundary_measure_1d(u, AsymLine(lb), {{0.2, 0.5}}), quotient,
              1e-6);
  EXPECT_DOUBLE_EQ(AsymLine(lb).reversibility(), 2.5);
  EXPECT_DOUBLE_EQ(AsymLine(0.25).reversibility(), 4.0);
}

}  // namespace
}  // namespace needle
