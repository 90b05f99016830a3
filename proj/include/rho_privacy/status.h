// Copyright 2026 The rho-privacy Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RHO_PRIVACY_STATUS_H_
#define RHO_PRIVACY_STATUS_H_

#include <optional>
#include <string_view>

#include "absl/status/status.h"

namespace rho_privacy {

// Library-level error kinds. Each is carried as a payload on an absl::Status
// whose canonical code groups them for the command-line exit-code contract:
//   kInvalidArgument    -> validation errors
//   kOutOfRange         -> realm errors (rho outside a construction's domain)
//   kResourceExhausted  -> enumeration / search size errors
enum class ErrorCode {
  kNonPositiveMass,
  kNotNormalized,
  kNotSurjective,
  kAlphabetTooSmall,
  kShapeMismatch,
  kNotStochastic,
  kNotRowConstant,
  kNoPredicate,
  kDegenerateDenominator,
  kNegativeEntry,
  kIncompatibleFamily,
  kLambdaOutOfRange,
  kSameRowIndex,
  kRhoOutOfRealm,
  kEnumerationTooLarge,
  kSearchSpaceTooLarge,
  kInvalidGridStep,
  kNotRational,
};

std::string_view ErrorCodeName(ErrorCode code);

// Builds a status carrying `code`. The message is prefixed with the code name.
absl::Status MakeError(ErrorCode code, std::string_view message);

// Returns the code attached by MakeError, if any.
std::optional<ErrorCode> GetErrorCode(const absl::Status& status);

}  // namespace rho_privacy

#endif  // RHO_PRIVACY_STATUS_H_
