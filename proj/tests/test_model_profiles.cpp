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
#include <random>

#include "needle/model_profiles.hpp"

namespace needle {
namespace {

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

ProfileSpec spec(double K, Dimension N, ExtendedReal D,
                 std::vector<double> thetas) {
  return ProfileSpec{CdParams(K, N), D, std::move(thetas)};
}

// Profile of rho(t) = c (t + alpha) on [0, 1] evaluated by hand: the
// boundary point of the left or right half-interval of mass theta.
double affine_profile(double alpha, double theta) {
  const double Z = 0.5 + alpha;
  auto x_of = [&](double mass) {
    // x^2/2 + alpha x = mass Z
    return -alpha + std::sqrt(alpha * alpha + 2.0 * mass * Z);
  };
  const double left = (x_of(theta) + alpha) / Z;
  const double right = (x_of(1.0 - theta) + alpha) / Z;
  return std::min(left, right);
}

TEST(ClosedForms, SinPowerExamples) {
  EXPECT_NEAR(levy_gromov_profile(2.0, 3.0, 0.5), 2.0 / kPi, 1e-12);
  EXPECT_NEAR(levy_gromov_profile(2.0, 3.0, 0.5), 0.6366198, 1e-7);
  EXPECT_DOUBLE_EQ(levy_gromov_profile(2.0, 3.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(levy_gromov_profile(2.0, 3.0, 1.0), 0.0);
  // N = 2, K = 1: sin density on [0, pi], F(R) = (1 - cos R)/2.
  for (double th : {0.1, 0.3, 0.45}) {
    const double R = std::acos(1.0 - 2.0 * th);
    EXPECT_NEAR(levy_gromov_profile(1.0, 2.0, th), 0.5 * std::sin(R), 1e-10);
  }
  EXPECT_THROW(levy_gromov_profile(0.0, 3.0, 0.5), Error);
  EXPECT_THROW(levy_gromov_profile(1.0, 1.0, 0.5), Error);
}

TEST(ClosedForms, GaussianExamples) {
  EXPECT_NEAR(bakry_ledoux_profile(1.0, 0.5), 0.3989423, 1e-7);
  EXPECT_NEAR(bakry_ledoux_profile(1.0, phi_cdf(1.0)),
              std::exp(-0.5) / std::sqrt(2.0 * kPi), 1e-12);
  EXPECT_NEAR(bakry_ledoux_profile(4.0, 0.5), 2.0 / std::sqrt(2.0 * kPi),
              1e-12);
  EXPECT_THROW(bakry_ledoux_profile(-1.0, 0.5), Error);
}

TEST(ClosedForms, SymmetricAndConcave) {
  for (int k = 1; k < 50; ++k) {
    const double th = k / 100.0;
    EXPECT_NEAR(levy_gromov_profile(2.0, 3.0, th),
                levy_gromov_profile(2.0, 3.0, 1.0 - th), 1e-10);
    EXPECT_NEAR(bakry_ledoux_profile(1.5, th),
                bakry_ledoux_profile(1.5, 1.0 - th), 1e-12);
  }
  for (int k = 1; k < 99; ++k) {
    const double a = (k - 1) / 100.0;
    const double b = k / 100.0;
    const double c = (k + 1) / 100.0;
    for (auto f : {+[](double t) { return levy_gromov_profile(3.0, 4.0, t); },
                   +[](double t) { return bakry_ledoux_profile(1.0, t); }}) {
      EXPECT_GE(f(b), 0.5 * (f(a) + f(c)) - 1e-10);
    }
  }
}

TEST(ModelProfile, DispatchesToClosedForms) {
  const auto lg = model_profile(spec(2.0, Dimension::finite(3.0),
                                     ExtendedReal::finite(kPi), {0.5}));
  EXPECT_EQ(lg.method, "levy-gromov");
  EXPECT_NEAR(lg.value[0], 0.6366198, 1e-7);
  const auto inf = ExtendedReal::positive_infinity();
  const auto bl = model_profile(spec(1.0, Dimension::infinity(), inf, {0.5}));
  EXPECT_EQ(bl.method, "bakry-ledoux");
  const auto flat =
      model_profile(spec(0.0, Dimension::finite(3.0), inf, {0.2, 0.5}));
  EXPECT_EQ(flat.value, (std::vector<double>{0.0, 0.0}));
}

TEST(ModelProfile, NumericalMatchesClosedForms) {
  const std::vector<double> th = {0.1, 0.3, 0.5, 0.8};
  const auto lg = numerical_model_profile(
      spec(2.0, Dimension::finite(3.0), ExtendedReal::finite(kPi), th));
  const auto bl = numerical_model_profile(
      spec(1.0, Dimension::infinity(), ExtendedReal::positive_infinity(),
           th));
  for (std::size_t i = 0; i < th.size(); ++i) {
    EXPECT_NEAR(lg.value[i], levy_gromov_profile(2.0, 3.0, th[i]), 1e-6);
    EXPECT_NEAR(bl.value[i], bakry_ledoux_profile(1.0, th[i]), 1e-6);
  }
}

TEST(ModelProfile, FlatTwoDimensionalAgainstBruteForce) {
  const std::vector<double> th = {0.05, 0.2, 0.5};
  const auto num = numerical_model_profile(
      spec(0.0, Dimension::finite(2.0), ExtendedReal::finite(1.0), th));
  for (std::size_t i = 0; i < th.size(); ++i) {
    double brute = 1.0;  // uniform, the alpha -> infinity limit
    for (int k = 0; k <= 4000; ++k) {
      const double alpha = k == 0 ? 0.0 : std::pow(10.0, -6.0 + 9.0 * k / 4000);
      brute = std::min(brute, affine_profile(alpha, th[i]));
    }
    EXPECT_NEAR(num.value[i], brute, 1e-5 * (1.0 + brute)) << th[i];
  }
}

TEST(ModelProfile, SymmetricInTheta) {
  const std::vector<double> th = {0.15, 0.35, 0.65, 0.85};
  const auto p = numerical_model_profile(
      spec(1.0, Dimension::finite(3.0), ExtendedReal::finite(2.0), th));
  EXPECT_NEAR(p.value[0], p.value[3], 1e-6);
  EXPECT_NEAR(p.value[1], p.value[2], 1e-6);
}

TEST(ModelProfile, NonIncreasingAndContinuousInDiameter) {
  const std::vector<double> th = {0.2, 0.5};
  const auto params = Dimension::finite(3.0);
  const auto a = numerical_model_profile(
      spec(1.0, params, ExtendedReal::finite(2.0), th));
  const auto b = numerical_model_profile(
      spec(1.0, params, ExtendedReal::finite(2.01), th));
  const auto c = numerical_model_profile(
      spec(1.0, params, ExtendedReal::finite(2.5), th));
  for (std::size_t i = 0; i < th.size(); ++i) {
    EXPECT_LE(b.value[i], a.value[i] + 1e-7);
    EXPECT_LE(c.value[i], b.value[i] + 1e-7);
    EXPECT_NEAR(a.value[i], b.value[i], 0.02 * a.value[i]);
  }
}

TEST(ModelProfile, RejectsEmptyFamilies) {
  EXPECT_THROW(
      spec(1.0, Dimension::finite(0.5), ExtendedReal::finite(1.0), {0.5}),
      Error);
  try {
    numerical_model_profile(
        spec(1.0, Dimension::finite(3.0), ExtendedReal::finite(0.0), {0.5}));
    FAIL() << "expected FamilyEmpty";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFamilyEmpty);
  }
  EXPECT_THROW(numerical_model_profile(spec(1.0, Dimension::finite(3.0),
                                            ExtendedReal::finite(1.0), {1.0})),
               Error);
}

TEST(Profile, CsvRoundTrip) {
  Profile p{{0.25, 0.5}, {1.0, 2.0}, "test"};
  EXPECT_EQ(p.to_csv(), "theta,value\n0.25,1\n0.5,2\n");
}

}  // namespace
}  // namespace needle
