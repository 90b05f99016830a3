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

#ifndef RHO_PRIVACY_MECHANISMS_H_
#define RHO_PRIVACY_MECHANISMS_H_

#include <vector>

#include "absl/status/statusor.h"
#include "rho_privacy/model.h"

namespace rho_privacy {

inline constexpr double kStochasticTolerance = 1e-12;
inline constexpr double kRowEqualityTolerance = 1e-12;

// Dense row-major matrix, rows[row][col].
using Matrix = std::vector<std::vector<double>>;

// A row-stochastic matrix. Row = conditioning symbol, column = response.
class StochasticMatrix {
 public:
  int rows() const { return static_cast<int>(rows_.size()); }
  int cols() const { return rows_.empty() ? 0 : static_cast<int>(rows_[0].size()); }

  // Probability of response `col` given input `row`.
  double at(int row, int col) const { return rows_[row][col]; }
  const std::vector<double>& row(int row) const { return rows_[row]; }
  const Matrix& matrix() const { return rows_; }

  bool operator==(const StochasticMatrix& other) const = default;

 protected:
  StochasticMatrix() = default;
  explicit StochasticMatrix(Matrix rows) : rows_(std::move(rows)) {}

  // NotStochastic on ragged input, negative/non-finite entries or a row sum
  // off by more than kStochasticTolerance.
  static absl::Status Check(const Matrix& rows);

 private:
  Matrix rows_;
};

// W: X -> Z, an r x k channel from data symbols to responses.
class Mechanism : public StochasticMatrix {
 public:
  static absl::StatusOr<Mechanism> Create(Matrix rows);
  // For matrices stochastic by construction.
  static Mechanism FromTrustedRows(Matrix rows) {
    return Mechanism(std::move(rows));
  }
  // Checks shape against the model as well as stochasticity.
  static absl::StatusOr<Mechanism> CreateFor(const DataModel& model,
                                             Matrix rows);

 private:
  using StochasticMatrix::StochasticMatrix;
};

// V: Z -> Z, a k x k channel acting on the function value.
class AddNoiseMechanism : public StochasticMatrix {
 public:
  static absl::StatusOr<AddNoiseMechanism> Create(Matrix rows);
  static AddNoiseMechanism FromTrustedRows(Matrix rows) {
    return AddNoiseMechanism(std::move(rows));
  }

  int k() const { return rows(); }

 private:
  using StochasticMatrix::StochasticMatrix;
};

// min_x W(f(x)|x).
double RecoverabilityLevel(const Mechanism& w, const DataModel& model);
// min_i V(i|i).
double RecoverabilityLevel(const AddNoiseMechanism& v);

// Optimal single-response channel: max{ρ_c, ρ} on f(x), the rest spread over
// the other responses in proportion to P_X(x_i*).
Mechanism BuildWo(const DataModel& model, const SupportStats& stats,
                  double rho);
AddNoiseMechanism BuildVo(const DataModel& model, const SupportStats& stats,
                          double rho);

// Optimal channel for predicate privacy. Requires a predicate; fails with
// NoPredicate otherwise, DegenerateDenominator on numeric inconsistency.
absl::StatusOr<Mechanism> BuildWoPredicate(const DataModel& model,
                                           const SupportStats& stats,
                                           double rho);

// The predicate-optimal channel specialized to h = identity. Depends on the
// whole pmf and is not of add-noise type. Experimental: fails with
// NegativeEntry or DegenerateDenominator rather than emitting an invalid
// matrix.
absl::StatusOr<Mechanism> BuildWoDoublePrime(const DataModel& model,
                                             const SupportStats& stats,
                                             double rho);

// Block-diagonal 2x2 randomized response; for odd k the last row sends
// 1 - ρ to response 0.
AddNoiseMechanism BuildV1(int k, double rho);

// Uniform blocks of size floor(1/ρ) plus a filler block of size
// k mod floor(1/ρ). All-uniform for ρ <= 1/k. RhoOutOfRealm for ρ > 0.5.
absl::StatusOr<AddNoiseMechanism> BuildV2(int k, double rho);

// Relabeling of Z sorting P_X(x_i*) nonincreasing (stable, so ties keep the
// lower original label first). permutation[new_label] = old_label.
struct Relabeling {
  DataModel model;
  std::vector<int> permutation;
};
Relabeling CanonicalRelabel(const DataModel& model);
// The same permutation from support statistics alone.
std::vector<int> CanonicalPermutation(const SupportStats& stats);

// V_1 / V_2 built in the canonical labeling and mapped back to the model's
// own labels.
AddNoiseMechanism BuildV1ForModel(const DataModel& model, double rho);
absl::StatusOr<AddNoiseMechanism> BuildV2ForModel(const DataModel& model,
                                                  double rho);

// W(i|x) = V(i|f(x)).
Mechanism LiftToW(const AddNoiseMechanism& v, const DataModel& model);
// Inverse of LiftToW; NotRowConstant if W differs within some f^{-1}(j).
absl::StatusOr<AddNoiseMechanism> CollapseToV(const Mechanism& w,
                                              const DataModel& model);

// True iff rows a and b agree entrywise within kRowEqualityTolerance.
bool RowsEqual(const std::vector<double>& a, const std::vector<double>& b,
               double tolerance = kRowEqualityTolerance);

}  // namespace rho_privacy

#endif  // RHO_PRIVACY_MECHANISMS_H_
