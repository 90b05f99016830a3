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

#ifndef RHO_PRIVACY_MODEL_H_
#define RHO_PRIVACY_MODEL_H_

#include <optional>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace rho_privacy {

inline constexpr double kNormalizationTolerance = 1e-12;

// A problem instance: a strictly positive pmf over the data alphabet
// {0, ..., r-1}, the queried function f onto {0, ..., k-1}, and optionally a
// predicate h onto {0, ..., m-1} whose value is to be kept private.
//
// Immutable once built. The pmf is renormalized once, at construction.
class DataModel {
 public:
  // Validates and builds. `num_outputs` / `num_predicate_values` of 0 mean
  // "infer as max label + 1".
  static absl::StatusOr<DataModel> Create(
      std::vector<double> px, std::vector<int> f, int num_outputs = 0,
      std::optional<std::vector<int>> h = std::nullopt,
      int num_predicate_values = 0);

  int r() const { return static_cast<int>(px_.size()); }
  int k() const { return k_; }
  int m() const { return m_; }
  bool has_predicate() const { return h_.has_value(); }

  const std::vector<double>& px() const { return px_; }
  const std::vector<int>& f() const { return f_; }
  // Requires has_predicate().
  const std::vector<int>& h() const { return *h_; }

  double px(int x) const { return px_[x]; }
  int f(int x) const { return f_[x]; }

  // Data symbols in f^{-1}(i), ascending.
  const std::vector<int>& Preimage(int i) const { return preimages_[i]; }

  // Same structure (r, f, h) with a different pmf.
  absl::StatusOr<DataModel> WithPmf(std::vector<double> px) const;

 private:
  DataModel() = default;

  std::vector<double> px_;
  std::vector<int> f_;
  std::optional<std::vector<int>> h_;
  int k_ = 0;
  int m_ = 0;
  std::vector<std::vector<int>> preimages_;
};

// Checks the standing assumptions on raw inputs without building a model.
absl::Status Validate(const std::vector<double>& px, const std::vector<int>& f,
                      int num_outputs = 0,
                      const std::optional<std::vector<int>>& h = std::nullopt,
                      int num_predicate_values = 0);

// Predicate-side quantities, present iff the model carries h.
struct PredicateStats {
  int j_star = 0;
  // joint_mass[i][j] = P_X(f^{-1}(i) ∩ h^{-1}(j)).
  std::vector<std::vector<double>> joint_mass;
  std::vector<int> j_i_star;
  // P_X(h^{-1}(j)).
  std::vector<double> predicate_mass;
  double sum_joint_max = 0.0;  // Σ_i P_X(i, j_i*)
  double rho_c_prime = 0.0;
};

// Maximizers of the pmf within each function cell and the critical
// recoverability level. Argmax ties go to the lowest index.
struct SupportStats {
  int x_star = 0;
  int i_star = 0;
  std::vector<int> x_i_star;
  std::vector<double> x_i_star_mass;  // P_X(x_i*)
  std::vector<double> cell_mass;      // P_X(f^{-1}(i))
  double sum_xi_star = 0.0;
  double rho_c = 0.0;
  std::optional<PredicateStats> predicate;
};

SupportStats ComputeSupportStats(const DataModel& model);

// Joint pmf table, joint[x][y].
using JointTable = std::vector<std::vector<double>>;

// Data X̄ = (X, Y) flattened as x * |Y| + y, with h(X̄) = Y and f(X̄) = f(X).
// Predicate privacy on the result is the privacy of the randomized function Y.
absl::StatusOr<DataModel> LiftRandomizedFunction(const JointTable& joint,
                                                 const std::vector<int>& f);

// Data X̃ = (X, Y) flattened as x * |Y| + y, with h(X̃) = X (private) and
// f(X̃) = Y (the correlated nonprivate value being released).
absl::StatusOr<DataModel> LiftPrivateNonprivate(const JointTable& joint);

}  // namespace rho_privacy

#endif  // RHO_PRIVACY_MODEL_H_
