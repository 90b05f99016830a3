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

#include "rho_privacy/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "absl/strings/str_cat.h"
#include "rho_privacy/numeric.h"
#include "rho_privacy/status.h"
#include "rho_privacy/status_macros.h"

namespace rho_privacy {

absl::Status StochasticMatrix::Check(const Matrix& rows) {
  if (rows.empty() || rows[0].empty()) {
    return MakeError(ErrorCode::kNotStochastic, "empty matrix");
  }
  const size_t cols = rows[0].size();
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      return MakeError(ErrorCode::kNotStochastic,
                       absl::StrCat("row ", r, " has ", rows[r].size(),
                                    " entries, expected ", cols));
    }
    CompensatedSum sum;
    for (size_t c = 0; c < cols; ++c) {
      const double p = rows[r][c];
      if (!std::isfinite(p) || p < 0.0) {
        return MakeError(ErrorCode::kNotStochastic,
                         absl::StrCat("entry (", r, ",", c, ") = ", p));
      }
      sum.Add(p);
    }
    if (std::abs(sum.Total() - 1.0) > kStochasticTolerance) {
      return MakeError(ErrorCode::kNotStochastic,
                       absl::StrCat("row ", r, " sums to ", sum.Total()));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<Mechanism> Mechanism::Create(Matrix rows) {
  RHO_RETURN_IF_ERROR(Check(rows));
  return Mechanism(std::move(rows));
}

absl::StatusOr<Mechanism> Mechanism::CreateFor(const DataModel& model,
                                               Matrix rows) {
  RHO_ASSIGN_OR_RETURN(Mechanism w, Create(std::move(rows)));
  if (w.rows() != model.r() || w.cols() != model.k()) {
    return MakeError(ErrorCode::kShapeMismatch,
                     absl::StrCat("mechanism is ", w.rows(), "x", w.cols(),
                                  ", model needs ", model.r(), "x",
                                  model.k()));
  }
  return w;
}

absl::StatusOr<AddNoiseMechanism> AddNoiseMechanism::Create(Matrix rows) {
  RHO_RETURN_IF_ERROR(Check(rows));
  if (rows.size() != rows[0].size()) {
    return MakeError(ErrorCode::kShapeMismatch,
                     "add-noise mechanism must be square");
  }
  return AddNoiseMechanism(std::move(rows));
}

double RecoverabilityLevel(const Mechanism& w, const DataModel& model) {
  double level = 1.0;
  for (int x = 0; x < w.rows(); ++x) {
    level = std::min(level, w.at(x, model.f(x)));
  }
  return level;
}

double RecoverabilityLevel(const AddNoiseMechanism& v) {
  double level = 1.0;
  for (int i = 0; i < v.k(); ++i) level = std::min(level, v.at(i, i));
  return level;
}

namespace {

// Row of V_o for function value j.
std::vector<double> NoiseRow(const SupportStats& stats, int j,
                             double diagonal) {
  const int k = static_cast<int>(stats.x_i_star_mass.size());
  CompensatedSum rest;
  for (int l = 0; l < k; ++l) {
    if (l != j) rest.Add(stats.x_i_star_mass[l]);
  }
  std::vector<double> row(k);
  for (int i = 0; i < k; ++i) {
    row[i] = i == j ? diagonal
                    : (stats.x_i_star_mass[i] / rest.Total()) *
                          (1.0 - diagonal);
  }
  return row;
}

}  // namespace

AddNoiseMechanism BuildVo(const DataModel& model, const SupportStats& stats,
                          double rho) {
  const double m = std::max(stats.rho_c, rho);
  Matrix rows;
  for (int j = 0; j < model.k(); ++j) rows.push_back(NoiseRow(stats, j, m));
  return AddNoiseMechanism::FromTrustedRows(std::move(rows));
}

Mechanism BuildWo(const DataModel& model, const SupportStats& stats,
                  double rho) {
  return LiftToW(BuildVo(model, stats, rho), model);
}

absl::StatusOr<Mechanism> BuildWoPredicate(const DataModel& model,
                                           const SupportStats& stats,
                                           double rho) {
  if (!model.has_predicate() || !stats.predicate.has_value()) {
    return MakeError(ErrorCode::kNoPredicate,
                     "the model carries no predicate h");
  }
  const PredicateStats& pred = *stats.predicate;
  const int k = model.k();
  Matrix rows(model.r(), std::vector<double>(k, 0.0));
  if (std::abs(pred.rho_c_prime - 1.0) <= 1e-12) {
    for (int x = 0; x < model.r(); ++x) rows[x][model.f(x)] = 1.0;
    return Mechanism::FromTrustedRows(std::move(rows));
  }
  const double m = std::max(pred.rho_c_prime, rho);
  for (int x = 0; x < model.r(); ++x) {
    const int j = model.h()[x];
    const double denom = pred.sum_joint_max - pred.predicate_mass[j];
    if (!(denom > 0.0)) {
      return MakeError(
          ErrorCode::kDegenerateDenominator,
          absl::StrCat("denominator ", denom, " for predicate value ", j));
    }
    for (int i = 0; i < k; ++i) {
      const double excess =
          pred.joint_mass[i][pred.j_i_star[i]] - pred.joint_mass[i][j];
      rows[x][i] = (1.0 - m) * (excess / denom);
    }
    rows[x][model.f(x)] += m;
  }
  return Mechanism::Create(std::move(rows));
}

absl::StatusOr<Mechanism> BuildWoDoublePrime(const DataModel& model,
                                             const SupportStats& stats,
                                             double rho) {
  const int k = model.k();
  const double m = std::max(stats.rho_c, rho);
  Matrix rows(model.r(), std::vector<double>(k, 0.0));
  for (int x = 0; x < model.r(); ++x) {
    const double denom = stats.sum_xi_star - model.px(x);
    if (!(denom > 0.0)) {
      return MakeError(ErrorCode::kDegenerateDenominator,
                       absl::StrCat("denominator ", denom, " at x = ", x));
    }
    for (int i = 0; i < k; ++i) {
      // The mass P_X(i, x) of the singleton predicate cell is P_X(x) on the
      // response f(x) and zero elsewhere.
      const double own = i == model.f(x) ? model.px(x) : 0.0;
      const double entry =
          (1.0 - m) * ((stats.x_i_star_mass[i] - own) / denom);
      if (entry < 0.0) {
        return MakeError(ErrorCode::kNegativeEntry,
                         absl::StrCat("W(", i, "|", x, ") = ", entry));
      }
      rows[x][i] = entry;
    }
    rows[x][model.f(x)] += m;
  }
  return Mechanism::Create(std::move(rows));
}

AddNoiseMechanism BuildV1(int k, double rho) {
  Matrix rows(k, std::vector<double>(k, 0.0));
  for (int j = 0; j < k; ++j) {
    rows[j][j] = rho;
    int partner;
    if (j % 2 == 0) {
      partner = j + 1 < k ? j + 1 : 0;
    } else {
      partner = j - 1;
    }
    rows[j][partner] += 1.0 - rho;
  }
  return AddNoiseMechanism::FromTrustedRows(std::move(rows));
}

absl::StatusOr<AddNoiseMechanism> BuildV2(int k, double rho) {
  if (rho > 0.5) {
    return MakeError(ErrorCode::kRhoOutOfRealm,
                     absl::StrCat("V_2 needs rho <= 0.5, got ", rho));
  }
  Matrix rows(k, std::vector<double>(k, 0.0));
  if (rho <= 1.0 / k) {
    for (auto& row : rows) std::fill(row.begin(), row.end(), 1.0 / k);
    return AddNoiseMechanism::FromTrustedRows(std::move(rows));
  }
  const int block = static_cast<int>(std::floor(1.0 / rho + 1e-9));
  const int full_blocks = k / block;
  const int filler = k % block;
  auto fill_block = [&rows](int start, int size) {
    for (int a = start; a < start + size; ++a) {
      for (int b = start; b < start + size; ++b) rows[a][b] = 1.0 / size;
    }
  };
  for (int t = 0; t < full_blocks; ++t) fill_block(t * block, block);
  if (filler > 0) fill_block(full_blocks * block, filler);
  return AddNoiseMechanism::FromTrustedRows(std::move(rows));
}

std::vector<int> CanonicalPermutation(const SupportStats& stats) {
  std::vector<int> perm(stats.x_i_star_mass.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&stats](int a, int b) {
    return stats.x_i_star_mass[a] > stats.x_i_star_mass[b];
  });
  return perm;
}

Relabeling CanonicalRelabel(const DataModel& model) {
  const std::vector<int> perm = CanonicalPermutation(ComputeSupportStats(model));
  std::vector<int> inverse(perm.size());
  for (size_t a = 0; a < perm.size(); ++a) inverse[perm[a]] = static_cast<int>(a);
  std::vector<int> f(model.r());
  for (int x = 0; x < model.r(); ++x) f[x] = inverse[model.f(x)];
  std::optional<std::vector<int>> h;
  if (model.has_predicate()) h = model.h();
  auto relabeled =
      DataModel::Create(model.px(), std::move(f), model.k(), std::move(h),
                        model.m());
  return Relabeling{*std::move(relabeled), perm};
}

namespace {

AddNoiseMechanism Unpermute(const AddNoiseMechanism& sorted,
                            const std::vector<int>& perm) {
  const int k = sorted.k();
  Matrix rows(k, std::vector<double>(k, 0.0));
  for (int b = 0; b < k; ++b) {
    for (int a = 0; a < k; ++a) rows[perm[b]][perm[a]] = sorted.at(b, a);
  }
  return AddNoiseMechanism::FromTrustedRows(std::move(rows));
}

}  // namespace

AddNoiseMechanism BuildV1ForModel(const DataModel& model, double rho) {
  return Unpermute(BuildV1(model.k(), rho),
                   CanonicalPermutation(ComputeSupportStats(model)));
}

absl::StatusOr<AddNoiseMechanism> BuildV2ForModel(const DataModel& model,
                                                  double rho) {
  RHO_ASSIGN_OR_RETURN(AddNoiseMechanism sorted, BuildV2(model.k(), rho));
  return Unpermute(sorted, CanonicalPermutation(ComputeSupportStats(model)));
}

Mechanism LiftToW(const AddNoiseMechanism& v, const DataModel& model) {
  Matrix rows;
  rows.reserve(model.r());
  for (int x = 0; x < model.r(); ++x) rows.push_back(v.row(model.f(x)));
  return Mechanism::FromTrustedRows(std::move(rows));
}

bool RowsEqual(const std::vector<double>& a, const std::vector<double>& b,
               double tolerance) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tolerance) return false;
  }
  return true;
}

absl::StatusOr<AddNoiseMechanism> CollapseToV(const Mechanism& w,
                                              const DataModel& model) {
  if (w.rows() != model.r() || w.cols() != model.k()) {
    return MakeError(ErrorCode::kShapeMismatch,
                     "mechanism shape does not match the model");
  }
  Matrix rows;
  for (int j = 0; j < model.k(); ++j) {
    const std::vector<int>& cell = model.Preimage(j);
    for (int x : cell) {
      if (!RowsEqual(w.row(x), w.row(cell.front()))) {
        return MakeError(ErrorCode::kNotRowConstant,
                         absl::StrCat("rows ", cell.front(), " and ", x,
                                      " differ inside f^{-1}(", j, ")"));
      }
    }
    rows.push_back(w.row(cell.front()));
  }
  return AddNoiseMechanism::FromTrustedRows(std::move(rows));
}

}  // namespace rho_privacy
