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

#ifndef RHO_PRIVACY_PRIVACY_H_
#define RHO_PRIVACY_PRIVACY_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "rho_privacy/mechanisms.h"
#include "rho_privacy/model.h"

namespace rho_privacy {

enum class PrivacyMethod {
  kSingle,
  kNaiveEnumeration,
  kTypeClass,
  kReducedSupport,
};

std::string_view PrivacyMethodName(PrivacyMethod method);

// Maps a response tuple (z_1, ..., z_n) to the estimated data symbol.
using DecisionRule = std::function<int(std::span<const int>)>;

struct PrivacyReport {
  // Probability that the MAP estimator is wrong.
  double value = 0.0;
  double success = 1.0;
  PrivacyMethod method = PrivacyMethod::kSingle;
  // Single response only: P(Z = i) - max_x P_X(x) W(i|x), summing to value.
  std::vector<double> per_output_error;
  // Evaluated lazily; never materialized over all response tuples.
  DecisionRule decision_rule;
};

enum class MultiPath { kAuto, kNaive, kTypeClass };

struct EnumerationOptions {
  // Largest number of response tuples (or types) a path may visit.
  uint64_t cap = 20'000'000;
  int workers = 1;
  // kAuto takes the type-class path when all channels coincide.
  MultiPath path = MultiPath::kAuto;
};

// argmax_x P_X(x) W(response|x), lowest index on ties.
int MapEstimate(const DataModel& model, const Mechanism& w, int response);

PrivacyReport PrivacySingle(const DataModel& model, const Mechanism& w);

// Conditionally independent responses Z_t ~ W_t(.|X). EnumerationTooLarge
// when the chosen path exceeds the cap.
absl::StatusOr<PrivacyReport> PrivacyMulti(const DataModel& model,
                                           std::span<const Mechanism> ws,
                                           const EnumerationOptions& options = {});

// Add-noise responses V_t(.|f(X)). Equal channels go through the reduction
// to estimating f̃(X), which takes value j w.p. P_X(x_j*)/Σ_i P_X(x_i*).
absl::StatusOr<PrivacyReport> PrivacyMultiAddNoise(
    const DataModel& model, std::span<const AddNoiseMechanism> vs,
    const EnumerationOptions& options = {});

// MAP error for h(X) from one response. NoPredicate without h.
absl::StatusOr<PrivacyReport> PredicatePrivacy(const DataModel& model,
                                               const Mechanism& w);

// Success probability of the MAP estimate of f(X) from n responses.
absl::StatusOr<double> FunctionRecoveryProbability(
    const DataModel& model, std::span<const Mechanism> ws,
    const EnumerationOptions& options = {});

}  // namespace rho_privacy

#endif  // RHO_PRIVACY_PRIVACY_H_
