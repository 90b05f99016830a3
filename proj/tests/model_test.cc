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
#include <numeric>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "rho_privacy/status.h"
#include "test_util.h"

namespace rho_privacy {
namespace {

ErrorCode CodeOf(const absl::Status& s) { return GetErrorCode(s).value(); }

TEST(ValidateTest, AcceptsReferenceInstance) {
  EXPECT_TRUE(Validate({0.5, 0.3, 0.2}, {0, 1, 2}).ok());
}

TEST(ValidateTest, RejectsZeroMass) {
  EXPECT_EQ(CodeOf(Validate({1.0, 0.0}, {0, 1})), ErrorCode::kNonPositiveMass);
}

TEST(ValidateTest, RejectsEmptyPreimage) {
  EXPECT_EQ(CodeOf(Validate({0.5, 0.5}, {0, 0}, 2)),
            ErrorCode::kNotSurjective);
}

TEST(ValidateTest, RejectsUnnormalized) {
  EXPECT_EQ(CodeOf(Validate({0.5, 0.4}, {0, 1})), ErrorCode::kNotNormalized);
}

TEST(ValidateTest, RejectsSingleOutput) {
  EXPECT_EQ(CodeOf(Validate({0.5, 0.5}, {0, 0})),
            ErrorCode::kAlphabetTooSmall);
  EXPECT_EQ(CodeOf(Validate({0.5, 0.5}, {0, 1}, 0,
                            std::vector<int>{0, 0})),
            ErrorCode::kAlphabetTooSmall);
}

TEST(ValidateTest, ReportsFirstViolation) {
  // Zero mass is reported before the surjectivity failure.
  EXPECT_EQ(CodeOf(Validate({1.0, 0.0}, {0, 0}, 2)),
            ErrorCode::kNonPositiveMass);
}

TEST(DataModelTest, RenormalizesWithinTolerance) {
  auto model = DataModel::Create({0.5, 0.5 + 5e-13}, {0, 1});
  ASSERT_TRUE(model.ok());
  EXPECT_EQ(model->px(0) + model->px(1), 1.0);
}

TEST(SupportStatsTest, ReferenceInstance) {
  auto model = DataModel::Create({0.5, 0.3, 0.2}, {0, 1, 2}).value();
  SupportStats s = ComputeSupportStats(model);
  EXPECT_EQ(s.x_star, 0);
  EXPECT_EQ(s.i_star, 0);
  EXPECT_EQ(s.x_i_star, (std::vector<int>{0, 1, 2}));
  EXPECT_NEAR(s.sum_xi_star, 1.0, 1e-15);
  EXPECT_NEAR(s.rho_c, 0.5, 1e-15);
  EXPECT_FALSE(s.predicate.has_value());
}

TEST(SupportStatsTest, UniformGivesReciprocalK) {
  std::vector<int> f(8);
  std::iota(f.begin(), f.end(), 0);
  auto model = DataModel::Create(std::vector<double>(8, 0.125), f).value();
  EXPECT_NEAR(ComputeSupportStats(model).rho_c, 0.125, 1e-15);
}

TEST(SupportStatsTest, PredicateQuantities) {
  auto model = DataModel::Create({0.4, 0.3, 0.2, 0.1}, {0, 0, 1, 1}, 0,
                                 std::vector<int>{0, 1, 0, 1})
                   .value();
  SupportStats s = ComputeSupportStats(model);
  ASSERT_TRUE(s.predicate.has_value());
  const PredicateStats& p = *s.predicate;
  EXPECT_NEAR(p.joint_mass[0][0], 0.4, 1e-15);
  EXPECT_NEAR(p.joint_mass[0][1], 0.3, 1e-15);
  EXPECT_NEAR(p.joint_mass[1][0], 0.2, 1e-15);
  EXPECT_NEAR(p.joint_mass[1][1], 0.1, 1e-15);
  EXPECT_EQ(p.j_star, 0);
  EXPECT_EQ(p.j_i_star, (std::vector<int>{0, 0}));
  EXPECT_NEAR(p.rho_c_prime, 1.0, 1e-12);
}

TEST(SupportStatsTest, PredicateEqualToFunction) {
  auto model = DataModel::Create({0.35, 0.15, 0.3, 0.2}, {0, 0, 1, 1}, 0,
                                 std::vector<int>{0, 0, 1, 1})
                   .value();
  const SupportStats s = ComputeSupportStats(model);
  const PredicateStats& p = *s.predicate;
  // Cell masses are 0.5 and 0.5; the ratio is the largest cell mass.
  EXPECT_NEAR(p.rho_c_prime, 0.5, 1e-12);
  EXPECT_EQ(p.j_i_star, (std::vector<int>{0, 1}));
}

TEST(SupportStatsTest, LowestIndexTieBreak) {
  auto model = DataModel::Create({0.3, 0.3, 0.4}, {0, 0, 1}).value();
  SupportStats s = ComputeSupportStats(model);
  EXPECT_EQ(s.x_i_star[0], 0);
  EXPECT_EQ(s.x_star, 2);
}

using testing::RandomPmf;
using testing::RandomSurjection;

TEST(SupportStatsProperty, CriticalLevelBounds) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const int r = 2 + static_cast<int>(rng() % 7);
    const int k = 2 + static_cast<int>(rng() % (r - 1));
    const int m = 2 + static_cast<int>(rng() % (r - 1));
    auto model = DataModel::Create(RandomPmf(rng, r), RandomSurjection(rng, r, k),
                                   k, RandomSurjection(rng, r, m), m)
                     .value();
    SupportStats s = ComputeSupportStats(model);
    EXPECT_GE(s.rho_c, 1.0 / k - 1e-15);
    EXPECT_LT(s.rho_c, 1.0);
    const PredicateStats& p = *s.predicate;
    EXPECT_GE(p.rho_c_prime, std::max(1.0 / m, 1.0 / k) - 1e-12);
    EXPECT_LE(p.rho_c_prime, 1.0);
    double total = 0;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < m; ++j) total += p.joint_mass[i][j];
      EXPECT_EQ(p.joint_mass[i][p.j_i_star[i]],
                *std::max_element(p.joint_mass[i].begin(),
                                  p.joint_mass[i].end()));
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(SupportStatsProperty, PermutationEquivariance) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const int r = 2 + static_cast<int>(rng() % 7);
    const int k = 2 + static_cast<int>(rng() % (r - 1));
    std::vector<double> px = RandomPmf(rng, r);
    std::vector<int> f = RandomSurjection(rng, r, k);
    std::vector<int> h = RandomSurjection(rng, r, 2);
    std::vector<int> sigma(r);
    std::iota(sigma.begin(), sigma.end(), 0);
    std::shuffle(sigma.begin(), sigma.end(), rng);
    // Symbol x of the original lands at position sigma[x].
    std::vector<double> px2(r);
    std::vector<int> f2(r), h2(r);
    for (int x = 0; x < r; ++x) {
      px2[sigma[x]] = px[x];
      f2[sigma[x]] = f[x];
      h2[sigma[x]] = h[x];
    }
    auto a = ComputeSupportStats(DataModel::Create(px, f, k, h, 2).value());
    auto b = ComputeSupportStats(DataModel::Create(px2, f2, k, h2, 2).value());
    EXPECT_NEAR(a.rho_c, b.rho_c, 1e-15);
    EXPECT_NEAR(a.sum_xi_star, b.sum_xi_star, 1e-15);
    EXPECT_NEAR(a.predicate->rho_c_prime, b.predicate->rho_c_prime, 1e-15);
    for (int i = 0; i < k; ++i) {
      EXPECT_EQ(a.x_i_star_mass[i], b.x_i_star_mass[i]);
    }
  }
}

TEST(LiftTest, RandomizedFunction) {
  const JointTable joint = {{0.4, 0.1}, {0.2, 0.3}};
  auto model = LiftRandomizedFunction(joint, {0, 1}).value();
  EXPECT_EQ(model.r(), 4);
  EXPECT_EQ(model.h(), (std::vector<int>{0, 1, 0, 1}));
  EXPECT_EQ(model.f(), (std::vector<int>{0, 0, 1, 1}));
  EXPECT_EQ(model.px(), (std::vector<double>{0.4, 0.1, 0.2, 0.3}));
}

TEST(LiftTest, RandomizedFunctionUniform) {
  const JointTable joint = {{0.25, 0.25}, {0.25, 0.25}};
  auto model = LiftRandomizedFunction(joint, {0, 1}).value();
  EXPECT_EQ(model.r(), 4);
  for (double p : model.px()) EXPECT_EQ(p, 0.25);
  EXPECT_EQ(model.h(), (std::vector<int>{0, 1, 0, 1}));
}

TEST(LiftTest, PrivateNonprivate) {
  const JointTable joint = {{0.4, 0.1}, {0.2, 0.3}};
  auto model = LiftPrivateNonprivate(joint).value();
  EXPECT_EQ(model.h(), (std::vector<int>{0, 0, 1, 1}));
  EXPECT_EQ(model.f(), (std::vector<int>{0, 1, 0, 1}));
}

TEST(LiftTest, Errors) {
  EXPECT_EQ(CodeOf(LiftRandomizedFunction({{0.5, 0.0}, {0.25, 0.25}}, {0, 1})
                       .status()),
            ErrorCode::kNonPositiveMass);
  EXPECT_EQ(CodeOf(LiftPrivateNonprivate({{0.5, 0.5}}).status()),
            ErrorCode::kAlphabetTooSmall);
}

}  // namespace
}  // namespace rho_privacy
