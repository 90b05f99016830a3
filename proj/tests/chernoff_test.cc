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

#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "gtest/gtest.h"
#include "rho_privacy/bounds.h"
#include "rho_privacy/mechanisms.h"
#include "rho_privacy/model.h"
#include "rho_privacy/numeric.h"
#include "rho_privacy/status.h"
#include "test_util.h"

namespace rho_privacy {
namespace {

using testing::Identity;
using testing::RandomModel;
using testing::UniformInt;

DataModel Reference() {
  return DataModel::Create({0.5, 0.3, 0.2}, {0, 1, 2}).value();
}

double ClosedRate(double b) { return -std::log2(2.0 * std::sqrt(b * (1.0 - b))); }

// Chernoff information by brute force over a dense λ grid.
double GridChernoff(const std::vector<double>& p, const std::vector<double>& q) {
  double best = kInfinity;
  for (int s = 0; s <= 200000; ++s) {
    const double lambda = s / 200000.0;
    double sum = 0;
    for (size_t i = 0; i < p.size(); ++i) {
      if (p[i] > 0 && q[i] > 0) sum += std::pow(p[i], lambda) * std::pow(q[i], 1 - lambda);
    }
    best = std::min(best, std::log2(sum));
  }
  return -best;
}

TEST(RenyiTest, Examples) {
  const std::vector<double> p = {0.2, 0.5, 0.3};
  for (double lambda : {0.1, 0.5, 0.9}) {
    EXPECT_NEAR(RenyiDivergence(p, p, lambda).value(), 0.0, 1e-15);
  }
  const std::vector<double> a = {0.3, 0.7};
  const std::vector<double> b = {0.7, 0.3};
  EXPECT_NEAR(0.5 * RenyiDivergence(a, b, 0.5).value(), ClosedRate(0.7), 1e-15);
  EXPECT_NEAR(ClosedRate(0.7), 0.125769, 1e-6);
  const std::vector<double> c = {1.0, 0.0};
  const std::vector<double> d = {0.0, 1.0};
  EXPECT_EQ(RenyiDivergence(c, d, 0.5).value(), kInfinity);
  EXPECT_EQ(GetErrorCode(RenyiDivergence(a, b, 1.0).status()),
            ErrorCode::kLambdaOutOfRange);
  EXPECT_EQ(GetErrorCode(RenyiDivergence(a, b, 0.0).status()),
            ErrorCode::kLambdaOutOfRange);
}

TEST(ChernoffPairTest, Examples) {
  auto v1 = BuildV1(3, 0.6);
  auto p01 = ChernoffPair(v1, 0, 1).value();
  EXPECT_NEAR(p01.value, 0.0294468445, 1e-9);
  EXPECT_NEAR(p01.lambda, 0.5, 1e-6);
  auto p02 = ChernoffPair(v1, 0, 2).value();
  EXPECT_NEAR(p02.value, -std::log2(0.4), 1e-12);
  EXPECT_NEAR(p02.value, 1.32193, 1e-5);
  EXPECT_EQ(p02.lambda, 0.0);
  EXPECT_NEAR(p02.value, GridChernoff(v1.row(0), v1.row(2)), 1e-9);
  auto same = AddNoiseMechanism::Create({{0.5, 0.5}, {0.5, 0.5}}).value();
  auto p = ChernoffPair(same, 0, 1).value();
  EXPECT_EQ(p.value, 0.0);
  EXPECT_EQ(p.lambda, 0.5);
  EXPECT_EQ(GetErrorCode(ChernoffPair(v1, 1, 1).status()),
            ErrorCode::kSameRowIndex);
  auto disjoint = AddNoiseMechanism::Create({{1.0, 0.0}, {0.0, 1.0}}).value();
  EXPECT_EQ(ChernoffPair(disjoint, 0, 1).value().value, kInfinity);
}

TEST(ChernoffPairProperty, MatchesDenseGridAndIsSymmetric) {
  std::mt19937_64 rng(201);
  for (int trial = 0; trial < 40; ++trial) {
    const int k = UniformInt(rng, 2, 5);
    Matrix rows = testing::RandomChannel(rng, 2, k).matrix();
    if (trial % 3 == 0) rows[0][UniformInt(rng, 0, k - 1)] = 0.0;
    for (auto& row : rows) {
      double t = 0;
      for (double x : row) t += x;
      for (double& x : row) x /= t;
    }
    auto v = Mechanism::Create(rows).value();
    auto ab = ChernoffPair(v, 0, 1).value();
    auto ba = ChernoffPair(v, 1, 0).value();
    EXPECT_EQ(ab.value, ba.value);
    EXPECT_NEAR(ab.lambda, 1.0 - ba.lambda, 1e-15);
    const double grid = GridChernoff(rows[0], rows[1]);
    EXPECT_GE(ab.value, grid - 1e-12);
    EXPECT_NEAR(ab.value, grid, 1e-8);
  }
}

TEST(ChernoffRadiusTest, Examples) {
  auto report = ChernoffRadius(BuildV1(3, 0.6));
  EXPECT_NEAR(report.radius, 0.0294468445, 1e-9);
  EXPECT_EQ(report.pairwise[report.argmin].a, 0);
  EXPECT_EQ(report.pairwise[report.argmin].b, 1);
  EXPECT_EQ(report.pairwise.size(), 3u);
  auto dup = AddNoiseMechanism::Create(
                 {{0.6, 0.2, 0.2}, {0.2, 0.6, 0.2}, {0.6, 0.2, 0.2}})
                 .value();
  EXPECT_EQ(ChernoffRadius(dup).radius, 0.0);
  auto model = DataModel::Create({0.6, 0.4}, {0, 1}).value();
  auto vo = BuildVo(model, ComputeSupportStats(model), 0.7);
  EXPECT_NEAR(ChernoffRadius(vo).radius, 0.125769, 1e-6);
  EXPECT_NEAR(ChernoffRadius(vo).radius, ClosedRate(0.7), 1e-9);
}

TEST(ChernoffRadiusProperty, PositiveIffRowsDistinct) {
  std::mt19937_64 rng(203);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = UniformInt(rng, 2, 5);
    Matrix rows = testing::RandomChannel(rng, k, k).matrix();
    auto distinct = Mechanism::Create(rows).value();
    EXPECT_GT(ChernoffRadius(distinct).radius, 0.0);
    rows[k - 1] = rows[0];
    EXPECT_EQ(ChernoffRadius(Mechanism::Create(rows).value()).radius, 0.0);
  }
}

TEST(ClosedRateProperty, V1MatchesBinaryDivergence) {
  for (int step = 51; step < 100; ++step) {
    const double rho = step / 100.0;
    for (int k : {2, 3, 4, 7}) {
      EXPECT_NEAR(ChernoffRadius(BuildV1(k, rho)).radius, BernoulliKl(0.5, rho),
                  1e-9)
          << k << " " << rho;
    }
  }
}

TEST(ClosedRateProperty, VoBinaryEqualityAndStrictForLargerAlphabets) {
  std::mt19937_64 rng(207);
  for (int trial = 0; trial < 100; ++trial) {
    const double rho = std::uniform_real_distribution<double>(0.51, 0.89)(rng);
    auto binary = RandomModel(rng, UniformInt(rng, 2, 6), 2);
    auto bs = ComputeSupportStats(binary);
    EXPECT_NEAR(ChernoffRadius(BuildVo(binary, bs, rho)).radius,
                ClosedRate(std::max(bs.rho_c, rho)), 1e-9);

    const int k = UniformInt(rng, 3, 5);
    auto model = RandomModel(rng, UniformInt(rng, k, 8), k);
    auto stats = ComputeSupportStats(model);
    const double margin = ChernoffRadius(BuildVo(model, stats, rho)).radius -
                          ClosedRate(std::max(stats.rho_c, rho));
    EXPECT_GT(margin, 1e-9);
  }
}

TEST(ReduceRowsTest, DistinctRowsKeepEverything) {
  auto model = Reference();
  auto stats = ComputeSupportStats(model);
  auto reduction = ReduceIdenticalRows(stats, BuildV1(3, 0.6));
  EXPECT_EQ(reduction.reduced_support, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(reduction.groups.size(), 3u);
}

TEST(ReduceRowsTest, UniformCollapsesToOneRow) {
  auto model = DataModel::Create(std::vector<double>(4, 0.25), Identity(4)).value();
  auto stats = ComputeSupportStats(model);
  auto reduction = ReduceIdenticalRows(stats, BuildVo(model, stats, 0.2));
  EXPECT_EQ(reduction.reduced_support.size(), 1u);
  EXPECT_EQ(reduction.groups.size(), 1u);
  auto asym = AsymptoticPrivacy(stats, BuildVo(model, stats, 0.2));
  EXPECT_NEAR(asym.limit, 0.75, 1e-15);
  EXPECT_EQ(asym.rate, kInfinity);
}

TEST(ReduceRowsTest, TiedTopMassesShareTheMaximizingRow) {
  // Cells 0 and 2 both have top mass 0.35 = P_X(x*); cell 1 is lighter.
  auto model = DataModel::Create({0.35, 0.3, 0.35}, {0, 1, 2}).value();
  auto stats = ComputeSupportStats(model);
  ASSERT_NEAR(stats.rho_c, 0.35, 1e-15);
  auto vo = BuildVo(model, stats, 0.2);
  auto reduction = ReduceIdenticalRows(stats, vo);
  ASSERT_EQ(reduction.groups.size(), 2u);
  EXPECT_EQ(reduction.groups[0], (std::vector<int>{0, 2}));
  for (int j : reduction.groups[0]) {
    EXPECT_TRUE(RowsEqual(vo.row(j), vo.row(stats.i_star)));
  }
  EXPECT_EQ(reduction.representatives[0], 0);
  EXPECT_EQ(reduction.reduced_support, (std::vector<int>{0, 1}));
}

TEST(ReduceRowsProperty, AboveCriticalRowsAreDistinct) {
  std::mt19937_64 rng(211);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = UniformInt(rng, 2, 5);
    auto model = RandomModel(rng, UniformInt(rng, k, 8), k);
    auto stats = ComputeSupportStats(model);
    const double rho =
        std::uniform_real_distribution<double>(stats.rho_c + 1e-3, 1.0)(rng);
    auto reduction = ReduceIdenticalRows(stats, BuildVo(model, stats, rho));
    EXPECT_EQ(static_cast<int>(reduction.groups.size()), k);
  }
}

TEST(AsymptoticPrivacyTest, Examples) {
  auto model = Reference();
  auto stats = ComputeSupportStats(model);
  auto a = AsymptoticPrivacy(stats, BuildV1(3, 0.6));
  EXPECT_NEAR(a.limit, 0.0, 1e-15);
  EXPECT_NEAR(a.rate, 0.0294468445, 1e-9);
  auto binary = DataModel::Create({0.6, 0.4}, {0, 1}).value();
  auto bs = ComputeSupportStats(binary);
  auto b = AsymptoticPrivacy(bs, BuildVo(binary, bs, 0.7));
  EXPECT_NEAR(b.limit, 0.0, 1e-15);
  EXPECT_NEAR(b.rate, 0.125769, 1e-6);
  auto uniform = AddNoiseMechanism::Create(Matrix(3, {1.0 / 3, 1.0 / 3, 1.0 / 3})).value();
  auto c = AsymptoticPrivacy(stats, uniform);
  EXPECT_NEAR(c.limit, 0.5, 1e-15);
  EXPECT_EQ(c.rate, kInfinity);
  auto report = FullChernoffReport(stats, uniform);
  EXPECT_EQ(report.radius, 0.0);
  EXPECT_EQ(report.reduced_support, (std::vector<int>{0}));
}

TEST(AsymptoticPrivacyProperty, ReducedLimitIsTheLargeSampleValue) {
  // Identical rows leave a gap that never closes.
  auto model = DataModel::Create({0.35, 0.3, 0.35}, {0, 1, 2}).value();
  auto stats = ComputeSupportStats(model);
  auto vo = BuildVo(model, stats, 0.2);
  auto asym = AsymptoticPrivacy(stats, vo);
  EXPECT_NEAR(asym.limit, 1.0 - 0.35 - 0.3, 1e-15);
  double previous = 1.0;
  for (int n = 10; n <= 60; n += 10) {
    std::vector<AddNoiseMechanism> vs(n, vo);
    const double value = PrivacyMultiAddNoise(model, vs).value().value;
    EXPECT_GT(value, asym.limit);
    EXPECT_LT(value - asym.limit, previous);
    previous = value - asym.limit;
  }
}

TEST(DecayFitTest, PrefactorCorrectedSlopeApproachesRadius) {
  auto model = Reference();
  auto stats = ComputeSupportStats(model);
  for (auto [rho, first] : {std::pair{0.6, 300}, std::pair{0.75, 120}}) {
    auto v1 = BuildV1ForModel(model, rho);
    auto fit =
        FitDecayRate(model, v1, 1.0 - stats.sum_xi_star, first, first + 20).value();
    // Excess ~ c n^{-1/2} 2^{-nD}; remove the polynomial factor.
    double sxy = 0, sxx = 0, mx = 0, my = 0;
    const int count = static_cast<int>(fit.n.size());
    for (int t = 0; t < count; ++t) {
      mx += fit.n[t] / static_cast<double>(count);
      my += (-std::log2(fit.excess[t]) - 0.5 * std::log2(fit.n[t])) / count;
    }
    for (int t = 0; t < count; ++t) {
      const double dx = fit.n[t] - mx;
      sxy += dx * (-std::log2(fit.excess[t]) - 0.5 * std::log2(fit.n[t]) - my);
      sxx += dx * dx;
    }
    const double rate = BernoulliKl(0.5, rho);
    EXPECT_NEAR(sxy / sxx, rate, 0.15 * rate) << rho;
    EXPECT_GT(fit.slope, 0.0);
  }
}

TEST(DecayFitTest, DeterministicChannelHasInfiniteSlope) {
  auto model = Reference();
  auto fit = FitDecayRate(model, BuildV1(3, 1.0), 0.0, 1, 3).value();
  EXPECT_EQ(fit.slope, kInfinity);
}

TEST(CompareSchemesTest, BinaryAboveCriticalIsEquality) {
  auto model = DataModel::Create({0.6, 0.4}, {0, 1}).value();
  auto cmp = CompareSchemes(model, 0.8, 4).value();
  EXPECT_EQ(cmp.verdict, Verdict::kEquality);
  EXPECT_TRUE(cmp.matrices_identical);
  for (const auto& row : cmp.table) EXPECT_EQ(row.pi_vo, row.pi_universal);
}

TEST(CompareSchemesTest, BinaryBelowCriticalIsStrict) {
  auto model = DataModel::Create({0.9, 0.1}, {0, 1}).value();
  auto cmp = CompareSchemes(model, 0.6, 6).value();
  EXPECT_EQ(cmp.verdict, Verdict::kStrict);
  EXPECT_NEAR(cmp.c_v1, 0.0294468445, 1e-9);
  EXPECT_NEAR(cmp.c_vo, ClosedRate(0.9), 1e-9);
  EXPECT_NEAR(cmp.c_vo, 0.736966, 1e-6);
}

TEST(CompareSchemesTest, ReferenceInstanceIsStrict) {
  auto cmp = CompareSchemes(Reference(), 0.6, 6).value();
  EXPECT_EQ(cmp.realm, "0.5<rho<1,k>=3");
  EXPECT_EQ(cmp.verdict, Verdict::kStrict);
  EXPECT_LT(cmp.c_v1, cmp.c_vo);
  EXPECT_GT(cmp.c_vo, cmp.vo_reference_rate);
  ASSERT_EQ(cmp.table.size(), 6u);
  EXPECT_NEAR(cmp.table[0].pi_vo, 0.4, 1e-12);
  EXPECT_NEAR(cmp.table[0].pi_universal, 0.38, 1e-12);
}

TEST(CompareSchemesTest, LowRealmUsesV2) {
  auto model = DataModel::Create(std::vector<double>(8, 0.125), Identity(8)).value();
  auto cmp = CompareSchemes(model, 0.3, 3).value();
  EXPECT_EQ(cmp.universal_scheme, "v2");
  EXPECT_NEAR(cmp.limit_universal, 0.625, 1e-12);
  EXPECT_NEAR(cmp.limit_vo, 0.0, 1e-12);
  EXPECT_EQ(cmp.verdict, Verdict::kStrict);
  for (const auto& row : cmp.table) EXPECT_NEAR(row.pi_universal, 0.625, 1e-12);
}

}  // namespace
}  // namespace rho_privacy
