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

#ifndef RHO_PRIVACY_BOUNDS_H_
#define RHO_PRIVACY_BOUNDS_H_

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "rho_privacy/model.h"

namespace rho_privacy {

// Optimal single-response privacy, 1 - max{ρ_c, ρ} Σ_i P_X(x_i*).
double RhoPrivacyClosed(const SupportStats& stats, double rho);
// Equivalent form 1 - max{P_X(x*), ρ Σ_i P_X(x_i*)}.
double RhoPrivacyClosedAlt(const DataModel& model, const SupportStats& stats,
                           double rho);

// 1 - max{ρ'_c, ρ} Σ_i P_X(i, j_i*). NoPredicate without predicate stats.
absl::StatusOr<double> PredicatePrivacyClosed(const SupportStats& stats,
                                              double rho);

struct CellMinEntropy {
  double cell_mass = 0.0;         // P_X(f^{-1}(i))
  double min_entropy_bits = 0.0;  // of the pmf conditioned on the cell
  double top_mass = 0.0;          // P_X(x_i*)
  bool consistent = false;        // top_mass = cell_mass 2^{-H_min}
};
std::vector<CellMinEntropy> MinEntropyDecomposition(const SupportStats& stats);

// P(Bin(n, p) <= j) and P(Bin(n, p) > j), each by direct summation of
// log-space terms.
double BinomialLowerTail(int n, double p, int j);
double BinomialUpperTail(int n, double p, int j);
// P(Bin(n, ρ) <= floor(n/2)).
double BinomTailLeHalf(int n, double rho);
// P(Bin(n, ρ) >= floor(n/2) + 1).
double BinomTailAboveHalf(int n, double rho);

// D(Ber(a) || Ber(b)) in bits; 0 log 0 = 0, a positive mass against a zero
// mass gives +inf.
double BernoulliKl(double a, double b);

// Exponent D(Ber(floor(n/2)/n) || Ber(ρ)) used by the tail sandwich.
double TailExponent(int n, double rho);

struct TailSandwich {
  double lower = 0.0;
  double exact = 0.0;
  double upper = 0.0;
};
// Method-of-types bounds on P(Bin(n, ρ) <= floor(n/2)), meaningful for
// ρ >= 0.5.
TailSandwich BinomialTailSandwich(int n, double rho);

double GammaN(const SupportStats& stats, int n, double rho);
// Uses the canonical labeling: odd positions of the nonincreasing list of
// P_X(x_i*).
double LambdaN(const SupportStats& stats, int n, double rho);

// Lower bound on the probability that the MAP estimate of f(X) from n
// rho-recoverable responses is right:
// max{ρ, max_i P_X(f^{-1}(i)), P(Bin(n, ρ) >= floor(n/2) + 1)}.
double FunctionRecoveryLowerBound(const SupportStats& stats, int n, double rho);

// Upper bound on the best privacy with n responses.
double ConverseUpper(const SupportStats& stats, int n, double rho);
// Lower bound on the privacy of n copies of V_1. RhoOutOfRealm unless
// 0.5 < ρ <= 1.
absl::StatusOr<double> AchievabilityLowerV1(const SupportStats& stats, int n,
                                            double rho);
// Exact privacy of n copies of V_2 (any n). RhoOutOfRealm for ρ > 0.5.
absl::StatusOr<double> ClosedV2(const SupportStats& stats, double rho);

struct Prop2Bounds {
  double upper = 0.0;
  bool upper_valid = false;
  double lower = 0.0;
};
// RhoOutOfRealm unless 0.5 < ρ <= 1.
absl::StatusOr<Prop2Bounds> ExponentialBounds(const SupportStats& stats,
                                              int n, double rho);

enum class Realm { kConverging, kNonConverging };
std::string_view RealmName(Realm realm);

struct AsymptoticSummary {
  double limit = 0.0;
  double rate_bits = 0.0;  // +inf at ρ = 1
  Realm realm = Realm::kConverging;
  // ρ <= 0.5 only: V_2 stays strictly above π(1).
  bool strict_gap = false;
};
AsymptoticSummary Asymptotics(const SupportStats& stats, double rho);

struct BoundsReport {
  double rho = 0.0;
  int n = 1;
  double pi_rho = 0.0;
  double converse_upper = 0.0;
  std::optional<double> achiev_lower_v1;
  std::optional<double> closed_v2;
  double gamma_n = 0.0;
  double lambda_n = 0.0;
  std::optional<Prop2Bounds> prop2;
  double limit_value = 0.0;  // π(1)
  double rate_bits = 0.0;    // D(Ber(0.5) || Ber(ρ))
};
BoundsReport ComputeBounds(const SupportStats& stats, int n, double rho);

// kAuto takes V_1 for ρ > 0.5 and V_2 otherwise.
enum class GuaranteeScheme { kAuto, kV1, kV2 };

struct FamilyGuarantee {
  int index = 0;  // position of the minimizing prior in the family
  double value = 0.0;
};
// Smallest guaranteed privacy over a family of priors sharing (r, f, h):
// the optimal value for n = 1, the V_1 lower bound or the V_2 value for
// n > 1. IncompatibleFamily if the structures differ or the family is empty.
absl::StatusOr<FamilyGuarantee> PriorFamilyGuarantee(
    std::span<const DataModel> family, double rho, int n,
    GuaranteeScheme scheme);

}  // namespace rho_privacy

#endif  // RHO_PRIVACY_BOUNDS_H_
