// Copyright 2026 The hqp Authors
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

#ifndef HQP_COMMON_HPP_
#define HQP_COMMON_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hqp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class ErrorCode {
  kDimensionMismatch,
  kRankDeficient,
  kNotReducedPd,
  kSingularKkt,
  kSingularGram,
  kEmptyNullspace,
  kSingularNewton,
  kNonPositiveAlpha,
  kMissingAlpha,
  kFreeVariable,
  kAmbiguousStatus,
  kStepSearchFailed,
  kTooLarge,
  kInvalidConfig,
  kParseError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kNotReducedPd: return "NotReducedPd";
    case ErrorCode::kSingularKkt: return "SingularKkt";
    case ErrorCode::kSingularGram: return "SingularGram";
    case ErrorCode::kEmptyNullspace: return "EmptyNullspace";
    case ErrorCode::kSingularNewton: return "SingularNewton";
    case ErrorCode::kNonPositiveAlpha: return "NonPositiveAlpha";
    case ErrorCode::kMissingAlpha: return "MissingAlpha";
    case ErrorCode::kFreeVariable: return "FreeVariable";
    case ErrorCode::kAmbiguousStatus: return "AmbiguousStatus";
    case ErrorCode::kStepSearchFailed: return "StepSearchFailed";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

/// Input/validation failures are distinguished from numerical breakdowns so
/// front ends can map them to different exit codes.
inline bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kRankDeficient:
    case ErrorCode::kNotReducedPd:
    case ErrorCode::kNonPositiveAlpha:
    case ErrorCode::kMissingAlpha:
    case ErrorCode::kFreeVariable:
    case ErrorCode::kTooLarge:
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kParseError:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define HQP_CHECK(cond, code, msg)           \
  do {                                       \
    if (!(cond)) throw ::hqp::Error(code, msg); \
  } while (0)

inline double norm_inf(const Eigen::Ref<const Vector>& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

/// Max absolute row sum; zero for empty matrices.
inline double matrix_norm_inf(const Eigen::Ref<const Matrix>& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

inline double min_coeff(const Eigen::Ref<const Vector>& v) {
  return v.size() == 0 ? std::numeric_limits<double>::infinity() : v.minCoeff();
}

}  // namespace hqp

#endif  // HQP_COMMON_HPP_
