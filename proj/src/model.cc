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

#include "rho_privacy/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "absl/strings/str_cat.h"
#include "rho_privacy/numeric.h"
#include "rho_privacy/status.h"
#include "rho_privacy/status_macros.h"

namespace rho_privacy {
namespace {

absl::Status ValidateLabels(const std::vector<int>& labels, int declared,
                            int r, const char* what) {
  if (static_cast<int>(labels.size()) != r) {
    return MakeError(ErrorCode::kShapeMismatch,
                     absl::StrCat(what, " has ", labels.size(),
                                  " entries but the pmf has ", r));
  }
  int count = declared;
  if (count == 0) {
    count = labels.empty() ? 0 : *std::max_element(labels.begin(),
                                                    labels.end()) + 1;
  }
  if (count < 2) {
    return MakeError(ErrorCode::kAlphabetTooSmall,
                     absl::StrCat(what, " must take at least 2 values, got ",
                                  count));
  }
  std::vector<bool> hit(count, false);
  for (int x = 0; x < r; ++x) {
    if (labels[x] < 0 || labels[x] >= count) {
      return MakeError(ErrorCode::kNotSurjective,
                       absl::StrCat(what, "(", x, ") = ", labels[x],
                                    " outside {0..", count - 1, "}"));
    }
    hit[labels[x]] = true;
  }
  for (int i = 0; i < count; ++i) {
    if (!hit[i]) {
      return MakeError(ErrorCode::kNotSurjective,
                       absl::StrCat(what, " has empty preimage at ", i));
    }
  }
  return absl::OkStatus();
}

int CountLabels(const std::vector<int>& labels, int declared) {
  if (declared != 0) return declared;
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

}  // namespace

absl::Status Validate(const std::vector<double>& px, const std::vector<int>& f,
                      int num_outputs,
                      const std::optional<std::vector<int>>& h,
                      int num_predicate_values) {
  const int r = static_cast<int>(px.size());
  CompensatedSum total;
  for (int x = 0; x < r; ++x) {
    if (!(px[x] > 0.0) || !std::isfinite(px[x])) {
      return MakeError(ErrorCode::kNonPositiveMass,
                       absl::StrCat("P_X(", x, ") = ", px[x]));
    }
    total.Add(px[x]);
  }
  if (std::abs(total.Total() - 1.0) > kNormalizationTolerance) {
    return MakeError(ErrorCode::kNotNormalized,
                     absl::StrCat("pmf sums to ", total.Total()));
  }
  RHO_RETURN_IF_ERROR(ValidateLabels(f, num_outputs, r, "f"));
  if (h.has_value()) {
    RHO_RETURN_IF_ERROR(ValidateLabels(*h, num_predicate_values, r, "h"));
  }
  return absl::OkStatus();
}

absl::StatusOr<DataModel> DataModel::Create(std::vector<double> px,
                                            std::vector<int> f,
                                            int num_outputs,
                                            std::optional<std::vector<int>> h,
                                            int num_predicate_values) {
  RHO_RETURN_IF_ERROR(Validate(px, f, num_outputs, h, num_predicate_values));
  CompensatedSum total;
  for (double p : px) total.Add(p);
  const double norm = total.Total();
  if (norm != 1.0) {
    for (double& p : px) p /= norm;
  }
  DataModel model;
  model.k_ = CountLabels(f, num_outputs);
  model.px_ = std::move(px);
  model.f_ = std::move(f);
  if (h.has_value()) {
    model.m_ = CountLabels(*h, num_predicate_values);
    model.h_ = std::move(h);
  }
  model.preimages_.assign(model.k_, {});
  for (int x = 0; x < model.r(); ++x) {
    model.preimages_[model.f_[x]].push_back(x);
  }
  return model;
}

absl::StatusOr<DataModel> DataModel::WithPmf(std::vector<double> px) const {
  return Create(std::move(px), f_, k_, h_, m_);
}

SupportStats ComputeSupportStats(const DataModel& model) {
  const int r = model.r();
  const int k = model.k();
  SupportStats stats;
  stats.x_star = ArgMax(model.px());
  stats.i_star = model.f(stats.x_star);
  stats.x_i_star.assign(k, -1);
  stats.x_i_star_mass.assign(k, 0.0);
  stats.cell_mass.assign(k, 0.0);
  for (int x = 0; x < r; ++x) {
    const int i = model.f(x);
    stats.cell_mass[i] += model.px(x);
    if (stats.x_i_star[i] < 0 || model.px(x) > stats.x_i_star_mass[i]) {
      stats.x_i_star[i] = x;
      stats.x_i_star_mass[i] = model.px(x);
    }
  }
  CompensatedSum sum;
  for (double p : stats.x_i_star_mass) sum.Add(p);
  stats.sum_xi_star = sum.Total();
  stats.rho_c = model.px(stats.x_star) / stats.sum_xi_star;

  if (model.has_predicate()) {
    const int m = model.m();
    PredicateStats pred;
    pred.joint_mass.assign(k, std::vector<double>(m, 0.0));
    pred.predicate_mass.assign(m, 0.0);
    for (int x = 0; x < r; ++x) {
      pred.joint_mass[model.f(x)][model.h()[x]] += model.px(x);
      pred.predicate_mass[model.h()[x]] += model.px(x);
    }
    pred.j_star = ArgMax(pred.predicate_mass);
    pred.j_i_star.resize(k);
    CompensatedSum joint_sum;
    for (int i = 0; i < k; ++i) {
      pred.j_i_star[i] = ArgMax(pred.joint_mass[i]);
      joint_sum.Add(pred.joint_mass[i][pred.j_i_star[i]]);
    }
    pred.sum_joint_max = joint_sum.Total();
    pred.rho_c_prime =
        std::min(1.0, pred.predicate_mass[pred.j_star] / pred.sum_joint_max);
    stats.predicate = std::move(pred);
  }
  return stats;
}

namespace {

absl::Status CheckJoint(const JointTable& joint) {
  if (joint.empty() || joint[0].empty()) {
    return MakeError(ErrorCode::kAlphabetTooSmall, "empty joint table");
  }
  const size_t cols = joint[0].size();
  for (size_t x = 0; x < joint.size(); ++x) {
    if (joint[x].size() != cols) {
      return MakeError(ErrorCode::kShapeMismatch, "ragged joint table");
    }
    for (size_t y = 0; y < cols; ++y) {
      if (!(joint[x][y] > 0.0)) {
        return MakeError(ErrorCode::kNonPositiveMass,
                         absl::StrCat("P(", x, ",", y, ") = ", joint[x][y]));
      }
    }
  }
  return absl::OkStatus();
}

std::vector<double> Flatten(const JointTable& joint) {
  std::vector<double> px;
  for (const auto& row : joint) px.insert(px.end(), row.begin(), row.end());
  return px;
}

}  // namespace

absl::StatusOr<DataModel> LiftRandomizedFunction(const JointTable& joint,
                                                 const std::vector<int>& f) {
  RHO_RETURN_IF_ERROR(CheckJoint(joint));
  const int rows = static_cast<int>(joint.size());
  const int cols = static_cast<int>(joint[0].size());
  if (static_cast<int>(f.size()) != rows) {
    return MakeError(ErrorCode::kShapeMismatch,
                     "f must have one entry per row of the joint table");
  }
  std::vector<int> lifted_f;
  std::vector<int> h;
  for (int x = 0; x < rows; ++x) {
    for (int y = 0; y < cols; ++y) {
      lifted_f.push_back(f[x]);
      h.push_back(y);
    }
  }
  return DataModel::Create(Flatten(joint), std::move(lifted_f), 0,
                           std::move(h), cols);
}

absl::StatusOr<DataModel> LiftPrivateNonprivate(const JointTable& joint) {
  RHO_RETURN_IF_ERROR(CheckJoint(joint));
  const int rows = static_cast<int>(joint.size());
  const int cols = static_cast<int>(joint[0].size());
  std::vector<int> f;
  std::vector<int> h;
  for (int x = 0; x < rows; ++x) {
    for (int y = 0; y < cols; ++y) {
      f.push_back(y);
      h.push_back(x);
    }
  }
  return DataModel::Create(Flatten(joint), std::move(f), cols, std::move(h),
                           rows);
}

}  // namespace rho_privacy
