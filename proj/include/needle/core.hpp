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

#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace needle {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ErrorKind {
  kInvalidArgument,
  kDomainExceeded,
  kBadDimension,
  kNotANorm,
  kToleranceNotMet,
  kNonSmoothDensity,
  kMassDiverged,
  kQuantileFailure,
  kOverlappingIntervals,
  kFamilyEmpty,
  kInvalidSpace,
  kNotMeanZero,
  kNumericalDualityGap,
  kAmbiguousInterior,
  kNotSaturated,
  kMassUnreachable,
  kParseError,
  kMissingField,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kDomainExceeded: return "DomainExceeded";
    case ErrorKind::kBadDimension: return "BadDimension";
    case ErrorKind::kNotANorm: return "NotANorm";
    case ErrorKind::kToleranceNotMet: return "ToleranceNotMet";
    case ErrorKind::kNonSmoothDensity: return "NonSmoothDensity";
    case ErrorKind::kMassDiverged: return "MassDiverged";
    case ErrorKind::kQuantileFailure: return "QuantileFailure";
    case ErrorKind::kOverlappingIntervals: return "OverlappingIntervals";
    case ErrorKind::kFamilyEmpty: return "FamilyEmpty";
    case ErrorKind::kInvalidSpace: return "InvalidSpace";
    case ErrorKind::kNotMeanZero: return "NotMeanZero";
    case ErrorKind::kNumericalDualityGap: return "NumericalDualityGap";
    case ErrorKind::kAmbiguousInterior: return "AmbiguousInterior";
    case ErrorKind::kNotSaturated: return "NotSaturated";
    case ErrorKind::kMassUnreachable: return "MassUnreachable";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kMissingField: return "MissingField";
  }
  return "Unknown";
}

/// Library-wide exception. `kind()` identifies the failure class so callers
/// (the CLI in particular) can map it onto exit codes and error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// A nonnegative quantity that may legitimately be +infinity (the comparison
/// functions past the conjugate radius). Infinity is a tagged state rather
/// than an IEEE sentinel so that overflow can never masquerade as it.
class ExtendedReal {
 public:
  static constexpr ExtendedReal finite(double value) {
    return ExtendedReal(value, false);
  }
  static constexpr ExtendedReal positive_infinity() {
    return ExtendedReal(0.0, true);
  }

  constexpr bool is_finite() const { return !infinite_; }
  constexpr bool is_infinite() const { return infinite_; }

  double value() const {
    if (infinite_) {
      throw Error(ErrorKind::kInvalidArgument,
                  "value() requested from an infinite ExtendedReal");
    }
    return value_;
  }

  /// IEEE view, for arithmetic where +inf is the intended limit.
  constexpr double as_double() const { return infinite_ ? kInf : value_; }

  friend constexpr bool operator==(const ExtendedReal& a,
                                   const ExtendedReal& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }

 private:
  constexpr ExtendedReal(double value, bool infinite)
      : value_(value), infinite_(infinite) {}

  double value_;
  bool infinite_;
};

}  // namespace needle
