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

#include "rho_privacy/bounds.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"
#include "rho_privacy/mechanisms.h"
#include "rho_privacy/numeric.h"
#include "rho_privacy/status.h"
#include "rho_privacy/status_macros.h"

namespace rho_privacy {

double RhoPrivacyClosed(const SupportStats& stats, double rho) {
  return 1.0 - std::max(stats.rho_c, rho) * stats.sum_xi_star;
}

double RhoPrivacyClosedAlt(const DataModel& model, const SupportStats& stats,
                           double rho) {
  return 1.0 - std::max(model.px(stats.x_star), rho * stats.sum_xi_star);
}

absl::StatusOr<double> PredicatePrivacyClosed(const SupportStats& stats,
                                              double rho) {
  if (!stats.predicate.has_value()) {
    return MakeError(ErrorCode::kNoPredicate,
                     "the model carries no predicate h");
  }
  const PredicateStats& pred = *stats.predicate;
  return 1.0 - std::max(pred.rho_c_prime, rho) * pred.sum_joint_max;
}

std::vector<CellMinEntropy> MinEntropyDecomposition(const SupportStats& stats) {
  std::vector<CellMinEntropy> cells;
  for (size_t i = 0; i < stats.cell_mass.size(); ++i) {
    CellMinEntropy cell;
    cell.cell_mass = stats.cell_mass[i];
    cell.top_mass = stats.x_i_star_mass[i];
    cell.min_entropy_bits = -std::log2(cell.top_mass / cell.cell_mass);
    cell.consistent =
        std::abs(cell.top_mass -
                 cell.cell_mass * std::exp2(-cell.min_entropy_bits)) <= 1e-12;
    cells.push_back(cell);
  }
  return cells;
}

namespace {

long double BinomialTerm(int n, int j, double p) {
  if (p <= 0.0) return j == 0 ? 1.0L : 0.0L;
  if (p >= 1.0) return j == n ? 1.0L : 0.0L;
  const long double log_term =
      LogBinomial(n, j) + j * std::log(static_cast<long double>(p)) +
      (n - j) * std::log1p(-static_cast<long double>(p));
  return std::exp(log_term);
}

double SumTerms(int n, double p, int from, int to) {
  CompensatedSum sum;
  for (int j = std::max(0, from); j <= std::min(n, to); ++j) {
    sum.Add(static_cast<double>(BinomialTerm(n, j, p)));
  }
  return sum.Total();
}

}  // namespace

double BinomialLowerTail(int n, double p, int j) { return SumTerms(n, p, 0, j); }

double BinomialUpperTail(int n, double p, int j) {
  return SumTerms(n, p, j + 1, n);
}

double BinomTailLeHalf(int n, double rho) {
  return BinomialLowerTail(n, rho, n / 2);
}

double BinomTailAboveHalf(int n, double rho) {
  return BinomialUpperTail(n, rho, n / 2);
}

double BernoulliKl(double a, double b) {
  auto part = [](double p, double q) {
    if (p <= 0.0) return 0.0;
    if (q <= 0.0) return kInfinity;
    return p * std::log2(p / q);
  };
  return part(a, b) + part(1.0 - a, 1.0 - b);
}

double TailExponent(int n, double rho) {
  return BernoulliKl(static_cast<double>(n / 2) / n, rho);
}

TailSandwich BinomialTailSandwich(int n, double rho) {
  const double decay = std::exp2(-n * TailExponent(n, rho));
  return TailSandwich{decay / (n + 1), BinomTailLeHalf(n, rho),
                      (n / 2 + 1) * decay};
}

double GammaN(const SupportStats& stats, int n, double rho) {
  return std::min(1.0 - stats.rho_c,
                  std::min(1.0 - rho, BinomTailLeHalf(n, rho))) *
         stats.sum_xi_star;
}

namespace {

double OddSortedMass(const SupportStats& stats) {
  const std::vector<int> perm = CanonicalPermutation(stats);
  CompensatedSum sum;
  for (size_t a = 1; a < perm.size(); a += 2) {
    sum.Add(stats.x_i_star_mass[perm[a]]);
  }
  return sum.Total();
}

absl::Status RequireUpperRealm(double rho) {
  if (!(rho > 0.5 && rho <= 1.0)) {
    return MakeError(ErrorCode::kRhoOutOfRealm,
                     absl::StrCat("needs 0.5 < rho <= 1, got ", rho));
  }
  return absl::OkStatus();
}

}  // namespace

double LambdaN(const SupportStats& stats, int n, double rho) {
  return BinomTailLeHalf(n, rho) * OddSortedMass(stats);
}

double FunctionRecoveryLowerBound(const SupportStats& stats, int n,
                                  double rho) {
  double bound = std::max(rho, BinomTailAboveHalf(n, rho));
  for (double mass : stats.cell_mass) bound = std::max(bound, mass);
  return bound;
}

double ConverseUpper(const SupportStats& stats, int n, double rho) {
  return 1.0 - stats.sum_xi_star + GammaN(stats, n, rho);
}

absl::StatusOr<double> AchievabilityLowerV1(const SupportStats& stats, int n,
                                            double rho) {
  RHO_RETURN_IF_ERROR(RequireUpperRealm(rho));
  return 1.0 - stats.sum_xi_star + LambdaN(stats, n, rho);
}

absl::StatusOr<double> ClosedV2(const SupportStats& stats, double rho) {
  if (rho > 0.5) {
    return MakeError(ErrorCode::kRhoOutOfRealm,
                     absl::StrCat("V_2 needs rho <= 0.5, got ", rho));
  }
  const int k = static_cast<int>(stats.x_i_star_mass.size());
  if (rho <= 1.0 / k) return 1.0 - stats.x_i_star_mass[stats.i_star];
  const std::vector<int> perm = CanonicalPermutation(stats);
  const int block = static_cast<int>(std::floor(1.0 / rho + 1e-9));
  const int last = k % block != 0 ? k / block : k / block - 1;
  CompensatedSum sum;
  for (int i = 0; i <= last; ++i) sum.Add(stats.x_i_star_mass[perm[i * block]]);
  return 1.0 - sum.Total();
}

absl::StatusOr<Prop2Bounds> ExponentialBounds(const SupportStats& stats,
                                              int n, double rho) {
  RHO_RETURN_IF_ERROR(RequireUpperRealm(rho));
  const TailSandwich tail = BinomialTailSandwich(n, rho);
  Prop2Bounds bounds;
  bounds.upper = 1.0 - stats.sum_xi_star + tail.upper * stats.sum_xi_star;
  bounds.upper_valid = tail.upper <= 1.0 - std::min(rho, stats.rho_c);
  bounds.lower = 1.0 - stats.sum_xi_star + tail.lower * OddSortedMass(stats);
  return bounds;
}

std::string_view RealmName(Realm realm) {
  return realm == Realm::kConverging ? "converging" : "non-converging";
}

AsymptoticSummary Asymptotics(const SupportStats& stats, double rho) {
  AsymptoticSummary summary;
  const double pi_one = 1.0 - stats.sum_xi_star;
  if (rho > 0.5) {
    summary.limit = pi_one;
    summary.rate_bits = BernoulliKl(0.5, rho);
    summary.realm = Realm::kConverging;
    return summary;
  }
  summary.limit = *ClosedV2(stats, rho);
  summary.rate_bits = 0.0;
  summary.realm = Realm::kNonConverging;
  summary.strict_gap = summary.limit > pi_one;
  return summary;
}

BoundsReport ComputeBounds(const SupportStats& stats, int n, double rho) {
  BoundsReport report;
  report.rho = rho;
  report.n = n;
  report.pi_rho = RhoPrivacyClosed(stats, rho);
  report.converse_upper = ConverseUpper(stats, n, rho);
  report.gamma_n = GammaN(stats, n, rho);
  report.lambda_n = LambdaN(stats, n, rho);
  if (auto lower = AchievabilityLowerV1(stats, n, rho); lower.ok()) {
    report.achiev_lower_v1 = *lower;
  }
  if (auto v2 = ClosedV2(stats, rho); v2.ok()) report.closed_v2 = *v2;
  if (auto prop2 = ExponentialBounds(stats, n, rho); prop2.ok()) {
    report.prop2 = *prop2;
  }
  report.limit_value = 1.0 - stats.sum_xi_star;
  report.rate_bits = BernoulliKl(0.5, rho);
  return report;
}

absl::StatusOr<FamilyGuarantee> PriorFamilyGuarantee(
    std::span<const DataModel> family, double rho, int n,
    GuaranteeScheme scheme) {
  if (family.empty()) {
    return MakeError(ErrorCode::kIncompatibleFamily, "empty family");
  }
  const DataModel& first = family[0];
  FamilyGuarantee best;
  for (size_t t = 0; t < family.size(); ++t) {
    const DataModel& model = family[t];
    const bool same_h =
        model.has_predicate() == first.has_predicate() &&
        (!model.has_predicate() || model.h() == first.h());
    if (model.r() != first.r() || model.k() != first.k() ||
        model.f() != first.f() || !same_h) {
      return MakeError(ErrorCode::kIncompatibleFamily,
                       absl::StrCat("prior ", t, " has a different structure"));
    }
    const SupportStats stats = ComputeSupportStats(model);
    double value;
    if (n == 1) {
      value = RhoPrivacyClosed(stats, rho);
    } else {
      GuaranteeScheme chosen = scheme;
      if (chosen == GuaranteeScheme::kAuto) {
        chosen = rho > 0.5 ? GuaranteeScheme::kV1 : GuaranteeScheme::kV2;
      }
      if (chosen == GuaranteeScheme::kV1) {
        RHO_ASSIGN_OR_RETURN(value, AchievabilityLowerV1(stats, n, rho));
      } else {
        RHO_ASSIGN_OR_RETURN(value, ClosedV2(stats, rho));
      }
    }
    // Ties within rounding keep the earlier prior.
    if (t == 0 || value < best.value - 1e-12) {
      best.index = static_cast<int>(t);
      best.value = value;
    }
  }
  return best;
}

}  // namespace rho_privacy
