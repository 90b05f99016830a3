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

#include "rho_privacy/status.h"

#include <array>
#include <string>

#include "absl/strings/cord.h"

namespace rho_privacy {
namespace {

constexpr std::string_view kPayloadUrl = "rho_privacy/error_code";

struct CodeInfo {
  ErrorCode code;
  std::string_view name;
  absl::StatusCode canonical;
};

constexpr std::array<CodeInfo, 18> kCodes = {{
    {ErrorCode::kNonPositiveMass, "NonPositiveMass",
     absl::StatusCode::kInvalidArgument},
    {ErrorCode::kNotNormalized, "NotNormalized",
     absl::StatusCode::kInvalidArgument},
    {ErrorCode::kNotSurjective, "NotSurjective",
     absl::StatusCode::kInvalidArgument},
    {ErrorCode::kAlphabetTooSmall, "AlphabetTooSmall",
     absl::StatusCode::kInvalidArgument},
    {ErrorCode::kShapeMismatch, "ShapeMismatch",
     absl::StatusCode::kInvalidArgument},
    {ErrorCode::kNotStochastic, "NotStochastic",
     absl::StatusCode::kInvalidArgument},
    {ErrorCode::kNotRowConstant, "NotRowConstant",
     absl::StatusCode::kInvalidArgument},
    {ErrorCode::kNoPredicate, "NoPredicate",
     absl::StatusCode::kInvalidArgument},
    {ErrorCode::kDegenerateDenominator, "DegenerateDenominator",
     absl::StatusCode::kFailedPrecondition},
    {ErrorCode::kNegativeEntry, "NegativeEntry",
     absl::StatusCode::kFailedPrecondition},
    {ErrorCode::kIncompatibleFamily, "IncompatibleFamily",
     absl::StatusCode::kInvalidArgument},
    {ErrorCode::kLambdaOutOfRange, "LambdaOutOfRange",
     absl::StatusCode::kOutOfRange},
    {ErrorCode::kSameRowIndex, "SameRowIndex",
     absl::StatusCode::kInvalidArgument},
    {ErrorCode::kRhoOutOfRealm, "RhoOutOfRealm",
     absl::StatusCode::kOutOfRange},
    {ErrorCode::kEnumerationTooLarge, "EnumerationTooLarge",
     absl::StatusCode::kResourceExhausted},
    {ErrorCode::kSearchSpaceTooLarge, "SearchSpaceTooLarge",
     absl::StatusCode::kResourceExhausted},
    {ErrorCode::kInvalidGridStep, "InvalidGridStep",
     absl::StatusCode::kInvalidArgument},
    {ErrorCode::kNotRational, "NotRational",
     absl::StatusCode::kInvalidArgument},
}};

absl::string_view PayloadUrl() {
  return absl::string_view(kPayloadUrl.data(), kPayloadUrl.size());
}

const CodeInfo& Lookup(ErrorCode code) {
  for (const CodeInfo& info : kCodes) {
    if (info.code == code) return info;
  }
  return kCodes[0];
}

}  // namespace

std::string_view ErrorCodeName(ErrorCode code) { return Lookup(code).name; }

absl::Status MakeError(ErrorCode code, std::string_view message) {
  const CodeInfo& info = Lookup(code);
  std::string text(info.name);
  text.append(": ").append(message);
  absl::Status status(info.canonical, text);
  status.SetPayload(PayloadUrl(), absl::Cord(std::string(info.name)));
  return status;
}

std::optional<ErrorCode> GetErrorCode(const absl::Status& status) {
  auto payload = status.GetPayload(PayloadUrl());
  if (!payload.has_value()) return std::nullopt;
  const std::string name(*payload);
  for (const CodeInfo& info : kCodes) {
    if (info.name == name) return info.code;
  }
  return std::nullopt;
}

}  // namespace rho_privacy
