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

#ifndef RHO_PRIVACY_CHERNOFF_H_
#define RHO_PRIVACY_CHERNOFF_H_

#include <span>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "rho_privacy/mechanisms.h"
#include "rho_privacy/model.h"
#include "rho_privacy/privacy.h"

namespace rho_privacy {

// D_λ(p||q) = log2(Σ p_i^λ q_i^{1-λ}) / (λ - 1) in bits, for 0 < λ < 1.
// +inf for disjoint supports. LambdaOutOfRange otherwise.
absl::StatusOr<double> RenyiDivergence(std::span<const double> p,
                                       std::span<const double> q,
                                       double lambda);

struct PairChernoff {
  int a = 0;
  int b = 0;
  double value = 0.0;   // bits; +inf for disjoint rows
  double lambda = 0.5;  // minimizer, 0.5 by convention for equal/disjoint rows
};

// -min_{0 <= λ <= 1} log2 Σ_i V(i|a)^λ V(i|b)^{1-λ}. SameRowIndex if a == b.
absl::StatusOr<PairChernoff> ChernoffPair(const StochasticMatrix& v, int a,
                                          int b);
// Same minimization for two explicit rows.
PairChernoff ChernoffRows(std::span<const double> p, std::span<const double> q);

struct ChernoffReport {
  std::vector<PairChernoff> pairwise;  // unordered pairs, a < b, lexicographic
  double radius = 0.0;
  int argmin = -1;  // index into pairwise; -1 with fewer than two rows
  // Partition of the row labels into classes of equal rows.
  std::vector<std::vector<int>> identical_row_groups;
  // Representative kept from each class: largest P_X(x_l*), lowest label on
  // ties. Sorted ascending; this is R_S.
  std::vector<int> reduced_support;
  Matrix reduced_matrix;  // rows of V restricted to reduced_support
  double reduced_radius = 0.0;
  double asymptotic_limit = 0.0;
  double rate = 0.0;
};

// Pairwise values and radius only.
ChernoffReport ChernoffRadius(const StochasticMatrix& v);

struct RowReduction {
  std::vector<std::vector<int>> groups;
  std::vector<int> representatives;  // per group
  std::vector<int> reduced_support;
  Matrix reduced_matrix;
};
RowReduction ReduceIdenticalRows(const SupportStats& stats,
                                 const AddNoiseMechanism& v);

// Large-n limit 1 - Σ_{i in R_S} P_X(x_i*) of the privacy of V^n and the
// exponential rate of approach; +inf when a single row class remains (the
// privacy is then constant in n).
struct AsymptoticPrivacyResult {
  double limit = 0.0;
  double rate = 0.0;
};
AsymptoticPrivacyResult AsymptoticPrivacy(const SupportStats& stats,
                                          const AddNoiseMechanism& v);

// Everything above in one report.
ChernoffReport FullChernoffReport(const SupportStats& stats,
                                  const AddNoiseMechanism& v);

// Least-squares slope of -log2(π(V^n) - limit) against n over
// [n_first, n_last], from exact type-class values.
struct DecayFit {
  std::vector<int> n;
  std::vector<double> excess;
  double slope = 0.0;
};
absl::StatusOr<DecayFit> FitDecayRate(const DataModel& model,
                                      const AddNoiseMechanism& v,
                                      double limit, int n_first, int n_last,
                                      const EnumerationOptions& options = {});

enum class Verdict {
  kStrict,    // the universal scheme ends strictly above V_o
  kEquality,  // both schemes coincide
  kWeak,      // ordering holds, strictness not established
};
std::string_view VerdictName(Verdict verdict);

struct SchemeRow {
  int n = 0;
  double pi_vo = 0.0;
  double pi_universal = 0.0;
  double converse_upper = 0.0;
};

struct SchemeComparison {
  std::string_view realm;
  std::string_view universal_scheme;  // "v1" or "v2"
  Verdict verdict = Verdict::kWeak;
  bool matrices_identical = false;
  double c_v1 = 0.0;
  double c_vo = 0.0;
  double c_universal_reduced = 0.0;
  double c_vo_reduced = 0.0;
  // -log2 2 sqrt(m (1 - m)) with m = max{ρ_c, ρ}.
  double vo_reference_rate = 0.0;
  double limit_vo = 0.0;
  double limit_universal = 0.0;
  std::vector<SchemeRow> table;
  bool finite_n_disagrees = false;
};

// Compares V_o with V_1 (ρ > 0.5) or V_2 (ρ <= 0.5) for n = 1..n_max.
absl::StatusOr<SchemeComparison> CompareSchemes(
    const DataModel& model, double rho, int n_max,
    const EnumerationOptions& options = {});

}  // namespace rho_privacy

#endif  // RHO_PRIVACY_CHERNOFF_H_
