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

#include "rho_privacy/chernoff.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"
#include "rho_privacy/bounds.h"
#include "rho_privacy/numeric.h"
#include "rho_privacy/status.h"
#include "rho_privacy/status_macros.h"

namespace rho_privacy {

absl::StatusOr<double> RenyiDivergence(std::span<const double> p,
                                       std::span<const double> q,
                                       double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    return MakeError(ErrorCode::kLambdaOutOfRange,
                     absl::StrCat("order must lie in (0, 1), got ", lambda));
  }
  if (p.size() != q.size()) {
    return MakeError(ErrorCode::kShapeMismatch, "pmfs have different sizes");
  }
  CompensatedSum sum;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0 && q[i] > 0.0) {
      sum.Add(std::pow(p[i], lambda) * std::pow(q[i], 1.0 - lambda));
    }
  }
  if (sum.Total() <= 0.0) return kInfinity;
  return std::log2(sum.Total()) / (lambda - 1.0);
}

namespace {

constexpr double kLambdaMargin = 1e-9;
constexpr double kLambdaTolerance = 1e-12;

}  // namespace

PairChernoff ChernoffRows(std::span<const double> p,
                          std::span<const double> q) {
  PairChernoff result;
  bool equal = p.size() == q.size();
  for (size_t i = 0; equal && i < p.size(); ++i) {
    equal = std::abs(p[i] - q[i]) <= kRowEqualityTolerance;
  }
  if (equal) return result;

  std::vector<double> log_p;
  std::vector<double> log_q;
  double p_common = 0.0;
  double q_common = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0 && q[i] > 0.0) {
      log_p.push_back(std::log(p[i]));
      log_q.push_back(std::log(q[i]));
      p_common += p[i];
      q_common += q[i];
    }
  }
  if (log_p.empty()) {
    result.value = kInfinity;
    return result;
  }
  auto g = [&](double lambda) {
    CompensatedSum sum;
    for (size_t i = 0; i < log_p.size(); ++i) {
      sum.Add(std::exp(lambda * log_p[i] + (1.0 - lambda) * log_q[i]));
    }
    return std::log2(sum.Total());
  };
  double lo = kLambdaMargin;
  double hi = 1.0 - kLambdaMargin;
  while (hi - lo > kLambdaTolerance) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (g(m1) <= g(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  double lambda = 0.5 * (lo + hi);
  double best = g(lambda);
  // Limits at the ends keep only the common support.
  const double at_zero = std::log2(q_common);
  const double at_one = std::log2(p_common);
  if (at_zero < best) {
    best = at_zero;
    lambda = 0.0;
  }
  if (at_one < best) {
    best = at_one;
    lambda = 1.0;
  }
  result.value = std::max(0.0, -best);
  result.lambda = lambda;
  return result;
}

absl::StatusOr<PairChernoff> ChernoffPair(const StochasticMatrix& v, int a,
                                          int b) {
  if (a == b) {
    return MakeError(ErrorCode::kSameRowIndex,
                     absl::StrCat("both rows are ", a));
  }
  if (a < 0 || b < 0 || a >= v.rows() || b >= v.rows()) {
    return MakeError(ErrorCode::kShapeMismatch, "row index out of range");
  }
  // Solve in a fixed orientation so that swapping the rows is exact.
  const bool swapped = a > b;
  const int lo = swapped ? b : a;
  const int hi = swapped ? a : b;
  PairChernoff result = ChernoffRows(v.row(lo), v.row(hi));
  result.a = a;
  result.b = b;
  if (swapped) result.lambda = 1.0 - result.lambda;
  return result;
}

ChernoffReport ChernoffRadius(const StochasticMatrix& v) {
  ChernoffReport report;
  report.radius = kInfinity;
  for (int a = 0; a < v.rows(); ++a) {
    for (int b = a + 1; b < v.rows(); ++b) {
      PairChernoff pair = *ChernoffPair(v, a, b);
      if (report.argmin < 0 || pair.value < report.radius) {
        report.radius = pair.value;
        report.argmin = static_cast<int>(report.pairwise.size());
      }
      report.pairwise.push_back(pair);
    }
  }
  return report;
}

RowReduction ReduceIdenticalRows(const SupportStats& stats,
                                 const AddNoiseMechanism& v) {
  RowReduction reduction;
  std::vector<bool> assigned(v.k(), false);
  for (int j = 0; j < v.k(); ++j) {
    if (assigned[j]) continue;
    std::vector<int> group = {j};
    assigned[j] = true;
    for (int l = j + 1; l < v.k(); ++l) {
      if (!assigned[l] && RowsEqual(v.row(j), v.row(l))) {
        group.push_back(l);
        assigned[l] = true;
      }
    }
    int keep = group.front();
    for (int l : group) {
      if (stats.x_i_star_mass[l] > stats.x_i_star_mass[keep]) keep = l;
    }
    reduction.groups.push_back(std::move(group));
    reduction.representatives.push_back(keep);
  }
  reduction.reduced_support = reduction.representatives;
  std::sort(reduction.reduced_support.begin(), reduction.reduced_support.end());
  for (int j : reduction.reduced_support) {
    reduction.reduced_matrix.push_back(v.row(j));
  }
  return reduction;
}

namespace {

double ReducedRate(const RowReduction& reduction) {
  if (reduction.reduced_support.size() < 2) return kInfinity;
  return ChernoffRadius(Mechanism::FromTrustedRows(reduction.reduced_matrix))
      .radius;
}

double ReducedLimit(const SupportStats& stats, const RowReduction& reduction) {
  CompensatedSum kept;
  for (int j : reduction.reduced_support) kept.Add(stats.x_i_star_mass[j]);
  return 1.0 - kept.Total();
}

}  // namespace

AsymptoticPrivacyResult AsymptoticPrivacy(const SupportStats& stats,
                                          const AddNoiseMechanism& v) {
  const RowReduction reduction = ReduceIdenticalRows(stats, v);
  return AsymptoticPrivacyResult{ReducedLimit(stats, reduction),
                                 ReducedRate(reduction)};
}

ChernoffReport FullChernoffReport(const SupportStats& stats,
                                  const AddNoiseMechanism& v) {
  ChernoffReport report = ChernoffRadius(v);
  RowReduction reduction = ReduceIdenticalRows(stats, v);
  report.reduced_radius = ReducedRate(reduction);
  report.asymptotic_limit = ReducedLimit(stats, reduction);
  report.rate = report.reduced_radius;
  report.identical_row_groups = std::move(reduction.groups);
  report.reduced_support = std::move(reduction.reduced_support);
  report.reduced_matrix = std::move(reduction.reduced_matrix);
  return report;
}

absl::StatusOr<DecayFit> FitDecayRate(const DataModel& model,
                                      const AddNoiseMechanism& v,
                                      double limit, int n_first, int n_last,
                                      const EnumerationOptions& options) {
  DecayFit fit;
  bool vanished = false;
  for (int n = n_first; n <= n_last; ++n) {
    std::vector<AddNoiseMechanism> vs(n, v);
    RHO_ASSIGN_OR_RETURN(PrivacyReport report,
                         PrivacyMultiAddNoise(model, vs, options));
    fit.n.push_back(n);
    fit.excess.push_back(report.value - limit);
    if (!(report.value - limit > 0.0)) vanished = true;
  }
  if (vanished) {
    fit.slope = kInfinity;
    return fit;
  }
  const double count = static_cast<double>(fit.n.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (size_t t = 0; t < fit.n.size(); ++t) {
    mean_x += fit.n[t] / count;
    mean_y += -std::log2(fit.excess[t]) / count;
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (size_t t = 0; t < fit.n.size(); ++t) {
    const double dx = fit.n[t] - mean_x;
    sxy += dx * (-std::log2(fit.excess[t]) - mean_y);
    sxx += dx * dx;
  }
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return fit;
}

std::string_view VerdictName(Verdict verdict) {
  switch (verdict) {
    case Verdict::kStrict:
      return "strict";
    case Verdict::kEquality:
      return "equality";
    case Verdict::kWeak:
      return "weak";
  }
  return "unknown";
}

absl::StatusOr<SchemeComparison> CompareSchemes(
    const DataModel& model, double rho, int n_max,
    const EnumerationOptions& options) {
  if (n_max < 1) {
    return MakeError(ErrorCode::kShapeMismatch, "n_max must be at least 1");
  }
  const SupportStats stats = ComputeSupportStats(model);
  const int k = model.k();
  const AddNoiseMechanism vo = BuildVo(model, stats, rho);
  const AddNoiseMechanism v1 = BuildV1ForModel(model, rho);
  const bool upper_realm = rho > 0.5;
  AddNoiseMechanism universal = v1;
  if (!upper_realm) {
    RHO_ASSIGN_OR_RETURN(universal, BuildV2ForModel(model, rho));
  }

  SchemeComparison cmp;
  cmp.universal_scheme = upper_realm ? "v1" : "v2";
  cmp.matrices_identical = universal == vo;
  cmp.c_v1 = ChernoffRadius(v1).radius;
  cmp.c_vo = ChernoffRadius(vo).radius;
  const double m = std::max(stats.rho_c, rho);
  cmp.vo_reference_rate = -std::log2(2.0 * std::sqrt(m * (1.0 - m)));
  const AsymptoticPrivacyResult vo_limit = AsymptoticPrivacy(stats, vo);
  const AsymptoticPrivacyResult uni_limit = AsymptoticPrivacy(stats, universal);
  cmp.limit_vo = vo_limit.limit;
  cmp.limit_universal = uni_limit.limit;
  cmp.c_vo_reduced = vo_limit.rate;
  cmp.c_universal_reduced = uni_limit.rate;

  if (!upper_realm) {
    cmp.realm = "rho<=0.5";
    if (cmp.matrices_identical) {
      cmp.verdict = Verdict::kEquality;
    } else if (cmp.limit_universal > cmp.limit_vo + 1e-12) {
      cmp.verdict = Verdict::kStrict;
    } else {
      cmp.verdict = Verdict::kWeak;
    }
  } else if (rho >= 1.0) {
    cmp.realm = "rho=1";
    cmp.verdict = Verdict::kEquality;
  } else if (k == 2) {
    cmp.realm = "0.5<rho<1,k=2";
    cmp.verdict = rho < stats.rho_c ? Verdict::kStrict : Verdict::kEquality;
  } else {
    cmp.realm = "0.5<rho<1,k>=3";
    cmp.verdict = cmp.c_v1 < cmp.c_vo ? Verdict::kStrict : Verdict::kWeak;
  }

  for (int n = 1; n <= n_max; ++n) {
    SchemeRow row;
    row.n = n;
    std::vector<AddNoiseMechanism> a(n, vo);
    std::vector<AddNoiseMechanism> b(n, universal);
    RHO_ASSIGN_OR_RETURN(PrivacyReport ra, PrivacyMultiAddNoise(model, a, options));
    RHO_ASSIGN_OR_RETURN(PrivacyReport rb, PrivacyMultiAddNoise(model, b, options));
    row.pi_vo = ra.value;
    row.pi_universal = rb.value;
    row.converse_upper = ConverseUpper(stats, n, rho);
    if (cmp.verdict == Verdict::kStrict && row.pi_universal <= row.pi_vo) {
      cmp.finite_n_disagrees = true;
    }
    if (row.pi_universal < row.pi_vo - 1e-12) cmp.finite_n_disagrees = true;
    cmp.table.push_back(row);
  }
  return cmp;
}

}  // namespace rho_privacy
