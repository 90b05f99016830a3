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

#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "rho_privacy/model.h"
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

void ExpectRow(const StochasticMatrix& w, int row,
               const std::vector<double>& expected, double tol = 1e-12) {
  ASSERT_EQ(w.cols(), static_cast<int>(expected.size()));
  for (int i = 0; i < w.cols(); ++i) {
    EXPECT_NEAR(w.at(row, i), expected[i], tol) << "row " << row << " col " << i;
  }
}

void ExpectStochastic(const StochasticMatrix& w) {
  for (int x = 0; x < w.rows(); ++x) {
    double total = 0;
    for (int i = 0; i < w.cols(); ++i) {
      EXPECT_GE(w.at(x, i), 0.0);
      total += w.at(x, i);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(BuildWoTest, ReferenceRows) {
  auto model = Reference();
  auto w = BuildWo(model, ComputeSupportStats(model), 0.6);
  ExpectRow(w, 0, {0.6, 0.4 * 0.3 / 0.5, 0.4 * 0.2 / 0.5});
  ExpectRow(w, 1, {0.4 * 0.5 / 0.7, 0.6, 0.4 * 0.2 / 0.7});
  ExpectRow(w, 2, {0.4 * 0.5 / 0.8, 0.4 * 0.3 / 0.8, 0.6});
  EXPECT_NEAR(w.at(1, 0), 0.2857142857142857, 1e-15);
}

TEST(BuildWoTest, DeterministicAtOne) {
  std::mt19937_64 rng(3);
  auto model = RandomModel(rng, 6, 3);
  auto w = BuildWo(model, ComputeSupportStats(model), 1.0);
  for (int x = 0; x < model.r(); ++x) {
    for (int i = 0; i < model.k(); ++i) {
      EXPECT_EQ(w.at(x, i), i == model.f(x) ? 1.0 : 0.0);
    }
  }
}

TEST(BuildWoTest, UniformBelowCriticalIsUninformative) {
  auto model = DataModel::Create(std::vector<double>(4, 0.25), Identity(4)).value();
  auto stats = ComputeSupportStats(model);
  auto w = BuildWo(model, stats, 0.2);
  for (int x = 0; x < 4; ++x) ExpectRow(w, x, {0.25, 0.25, 0.25, 0.25});
  auto v = BuildVo(model, stats, 0.2);
  for (int j = 0; j < 4; ++j) ExpectRow(v, j, {0.25, 0.25, 0.25, 0.25});
}

TEST(BuildVoTest, IdentityAtOneAndCollapseOfWo) {
  std::mt19937_64 rng(5);
  auto model = RandomModel(rng, 7, 3);
  auto stats = ComputeSupportStats(model);
  auto v1 = BuildVo(model, stats, 1.0);
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) EXPECT_EQ(v1.at(j, i), i == j ? 1.0 : 0.0);
  }
  auto v = BuildVo(model, stats, 0.55);
  auto collapsed = CollapseToV(BuildWo(model, stats, 0.55), model).value();
  EXPECT_EQ(collapsed, v);
}

TEST(BuildV1Test, OddKWrapsToColumnZero) {
  auto v = BuildV1(3, 0.6);
  ExpectRow(v, 0, {0.6, 0.4, 0.0});
  ExpectRow(v, 1, {0.4, 0.6, 0.0});
  ExpectRow(v, 2, {0.4, 0.0, 0.6});
}

TEST(BuildV1Test, SingleAndDoubleBlock) {
  auto v2 = BuildV1(2, 0.7);
  ExpectRow(v2, 0, {0.7, 0.3});
  ExpectRow(v2, 1, {0.3, 0.7});
  auto v4 = BuildV1(4, 0.8);
  ExpectRow(v4, 0, {0.8, 0.2, 0, 0});
  ExpectRow(v4, 1, {0.2, 0.8, 0, 0});
  ExpectRow(v4, 2, {0, 0, 0.8, 0.2});
  ExpectRow(v4, 3, {0, 0, 0.2, 0.8});
}

TEST(BuildV2Test, FillerBlock) {
  auto v = BuildV2(8, 1.0 / 3.0).value();
  const double t = 1.0 / 3.0;
  ExpectRow(v, 0, {t, t, t, 0, 0, 0, 0, 0});
  ExpectRow(v, 4, {0, 0, 0, t, t, t, 0, 0});
  ExpectRow(v, 6, {0, 0, 0, 0, 0, 0, 0.5, 0.5});
  ExpectRow(v, 7, {0, 0, 0, 0, 0, 0, 0.5, 0.5});
}

TEST(BuildV2Test, UniformAndNoFiller) {
  auto v = BuildV2(8, 0.1).value();
  for (int j = 0; j < 8; ++j) ExpectRow(v, j, std::vector<double>(8, 0.125));
  auto w = BuildV2(4, 0.5).value();
  ExpectRow(w, 0, {0.5, 0.5, 0, 0});
  ExpectRow(w, 3, {0, 0, 0.5, 0.5});
}

TEST(BuildV2Test, RealmError) {
  EXPECT_EQ(GetErrorCode(BuildV2(4, 0.6).status()), ErrorCode::kRhoOutOfRealm);
}

TEST(BuildWoPredicateTest, DeterministicWhenCriticalIsOne) {
  auto model = DataModel::Create({0.4, 0.3, 0.2, 0.1}, {0, 0, 1, 1}, 0,
                                 std::vector<int>{0, 1, 0, 1})
                   .value();
  auto w = BuildWoPredicate(model, ComputeSupportStats(model), 0.9).value();
  for (int x = 0; x < 4; ++x) {
    for (int i = 0; i < 2; ++i) EXPECT_EQ(w.at(x, i), i == model.f(x) ? 1.0 : 0.0);
  }
}

TEST(BuildWoPredicateTest, NoPredicate) {
  auto model = Reference();
  EXPECT_EQ(GetErrorCode(
                BuildWoPredicate(model, ComputeSupportStats(model), 0.5).status()),
            ErrorCode::kNoPredicate);
}

TEST(BuildWoPredicateProperty, FeasibleAndCellConstant) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const int r = UniformInt(rng, 2, 8);
    const int k = UniformInt(rng, 2, std::min(r, 4));
    const int m = UniformInt(rng, 2, std::min(r, 4));
    auto model = RandomModel(rng, r, k, m);
    const double rho = UniformInt(rng, 0, 20) / 20.0;
    auto w = BuildWoPredicate(model, ComputeSupportStats(model), rho);
    ASSERT_TRUE(w.ok()) << w.status();
    ExpectStochastic(*w);
    EXPECT_GE(RecoverabilityLevel(*w, model), rho - 1e-12);
    for (int x = 0; x < r; ++x) {
      for (int y = 0; y < r; ++y) {
        if (model.f(x) == model.f(y) && model.h()[x] == model.h()[y]) {
          EXPECT_TRUE(RowsEqual(w->row(x), w->row(y)));
        }
      }
    }
  }
}

TEST(BuildWoDoublePrimeTest, ReferenceRow) {
  auto model = Reference();
  auto w = BuildWoDoublePrime(model, ComputeSupportStats(model), 0.6).value();
  // Row 0: own cell keeps 0.6 (numerator P(x_0*) - P(0) = 0), the rest is
  // spread over the other responses in proportion to their top masses.
  ExpectRow(w, 0, {0.6, 0.4 * 0.3 / 0.5, 0.4 * 0.2 / 0.5});
  ExpectRow(w, 1, {0.4 * 0.5 / 0.7, 0.6, 0.4 * 0.2 / 0.7});
}

TEST(BuildWoDoublePrimeTest, DeterministicAtOne) {
  std::mt19937_64 rng(19);
  auto model = RandomModel(rng, 6, 3);
  auto w = BuildWoDoublePrime(model, ComputeSupportStats(model), 1.0).value();
  for (int x = 0; x < 6; ++x) EXPECT_EQ(w.at(x, model.f(x)), 1.0);
}

TEST(BuildWoDoublePrimeProperty, NonnegativeOnRandomInstances) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    const int r = UniformInt(rng, 2, 8);
    auto model = RandomModel(rng, r, UniformInt(rng, 2, r));
    const double rho = UniformInt(rng, 0, 20) / 20.0;
    auto w = BuildWoDoublePrime(model, ComputeSupportStats(model), rho);
    ASSERT_TRUE(w.ok()) << w.status();
    ExpectStochastic(*w);
    EXPECT_GE(RecoverabilityLevel(*w, model), rho - 1e-12);
  }
}

TEST(CanonicalRelabelTest, SortsTopMasses) {
  // Top masses per cell are (0.2, 0.5, 0.3).
  auto model = DataModel::Create({0.2, 0.5, 0.3}, {0, 1, 2}).value();
  auto relabel = CanonicalRelabel(model);
  EXPECT_EQ(relabel.permutation, (std::vector<int>{1, 2, 0}));
  auto stats = ComputeSupportStats(relabel.model);
  EXPECT_EQ(stats.x_i_star_mass, (std::vector<double>{0.5, 0.3, 0.2}));
}

TEST(CanonicalRelabelTest, SortedIsIdentityAndTiesAreStable) {
  EXPECT_EQ(CanonicalRelabel(Reference()).permutation,
            (std::vector<int>{0, 1, 2}));
  auto ties = DataModel::Create({0.4, 0.4, 0.2}, {0, 1, 2}).value();
  EXPECT_EQ(CanonicalRelabel(ties).permutation, (std::vector<int>{0, 1, 2}));
  auto ties2 = DataModel::Create({0.2, 0.4, 0.4}, {0, 1, 2}).value();
  EXPECT_EQ(CanonicalRelabel(ties2).permutation, (std::vector<int>{1, 2, 0}));
}

TEST(LiftCollapseTest, RoundTrip) {
  auto model = DataModel::Create({0.2, 0.1, 0.3, 0.4}, {0, 1, 0, 2}).value();
  auto v = BuildV1(3, 0.6);
  auto w = LiftToW(v, model);
  EXPECT_EQ(w.row(0), v.row(0));
  EXPECT_EQ(w.row(2), v.row(0));
  EXPECT_EQ(w.row(3), v.row(2));
  EXPECT_EQ(CollapseToV(w, model).value(), v);
  auto w2 = LiftToW(CollapseToV(w, model).value(), model);
  EXPECT_EQ(w2, w);
}

TEST(LiftCollapseTest, NotRowConstant) {
  auto model = DataModel::Create({0.2, 0.1, 0.3, 0.4}, {0, 1, 0, 2}).value();
  std::mt19937_64 rng(29);
  auto w = testing::RandomChannel(rng, 4, 3);
  EXPECT_EQ(GetErrorCode(CollapseToV(w, model).status()),
            ErrorCode::kNotRowConstant);
}

TEST(MechanismTest, CreateRejectsBadRows) {
  EXPECT_EQ(GetErrorCode(Mechanism::Create({{0.5, 0.51}, {0.5, 0.5}}).status()),
            ErrorCode::kNotStochastic);
  EXPECT_EQ(GetErrorCode(Mechanism::Create({{1.1, -0.1}}).status()),
            ErrorCode::kNotStochastic);
  EXPECT_EQ(GetErrorCode(AddNoiseMechanism::Create({{0.5, 0.5}}).status()),
            ErrorCode::kShapeMismatch);
}

TEST(MechanismProperty, ConstructedChannelsAreFeasible) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const int r = UniformInt(rng, 2, 8);
    const int k = UniformInt(rng, 2, r);
    auto model = RandomModel(rng, r, k);
    auto stats = ComputeSupportStats(model);
    const double rho = UniformInt(rng, 0, 20) / 20.0;
    auto wo = BuildWo(model, stats, rho);
    ExpectStochastic(wo);
    EXPECT_GE(RecoverabilityLevel(wo, model), rho);
    auto vo = BuildVo(model, stats, rho);
    EXPECT_GE(RecoverabilityLevel(vo), rho);
    auto v1 = BuildV1ForModel(model, rho);
    ExpectStochastic(v1);
    EXPECT_GE(RecoverabilityLevel(v1), rho);
    if (rho <= 0.5) {
      auto v2 = BuildV2ForModel(model, rho).value();
      ExpectStochastic(v2);
      EXPECT_GE(RecoverabilityLevel(v2), rho - 1e-12);
    }
    // Rows of W_o agree on every cell.
    for (int x = 0; x < r; ++x) EXPECT_EQ(wo.row(x), vo.row(model.f(x)));
  }
}

TEST(MechanismProperty, UniversalSchemesIgnoreThePmf) {
  std::mt19937_64 rng(37);
  for (int k = 2; k <= 8; ++k) {
    for (double rho : {0.2, 1.0 / 3.0, 0.5}) {
      EXPECT_EQ(BuildV2(k, rho).value(), BuildV2(k, rho).value());
    }
    // Same ordering of top masses under two different pmfs.
    auto a = DataModel::Create(std::vector<double>(k, 1.0 / k), Identity(k)).value();
    std::vector<double> px(k);
    double total = 0;
    for (int i = 0; i < k; ++i) total += (px[i] = 1.0 + 1e-3 * (k - i));
    for (double& p : px) p /= total;
    auto b = DataModel::Create(px, Identity(k)).value();
    EXPECT_EQ(BuildV1ForModel(a, 0.7), BuildV1ForModel(b, 0.7));
  }
}

TEST(MechanismTest, VoEqualsV1ForTwoOutputsAboveCritical) {
  auto model = DataModel::Create({0.6, 0.4}, {0, 1}).value();
  auto stats = ComputeSupportStats(model);
  EXPECT_EQ(BuildVo(model, stats, 0.8), BuildV1(2, 0.8));
}

}  // namespace
}  // namespace rho_privacy
