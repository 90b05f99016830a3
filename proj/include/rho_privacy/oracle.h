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

#ifndef RHO_PRIVACY_ORACLE_H_
#define RHO_PRIVACY_ORACLE_H_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "boost/multiprecision/cpp_int.hpp"
#include "rho_privacy/mechanisms.h"
#include "rho_privacy/model.h"
#include "rho_privacy/privacy.h"

namespace rho_privacy {

// Independent checks. Nothing here calls the closed-form constructions to
// produce its own answer; they are only used as the targets being checked.

enum class ArithmeticMode { kFloat, kRational };

struct SearchConfig {
  // Entries are multiples of grid_step, which must divide 1.
  double grid_step = 0.05;
  double rho = 0.0;
  // Cap on the number of complete candidate mechanisms.
  uint64_t max_cells = 500'000'000;
  ArithmeticMode mode = ArithmeticMode::kFloat;
  int workers = 1;
};

struct SearchResult {
  Matrix best;
  double best_value = 0.0;
  uint64_t candidates = 0;
  double closed_form = 0.0;
  // r * k * grid_step.
  double slack = 0.0;
  // Privacy of the optimal construction at the same rho.
  double constructed_value = 0.0;
  bool dominated = false;
  bool constructed_within = false;
};

// Exhaustive grid maximization of the single-response privacy over
// mechanisms with W(f(x)|x) >= rho. SearchSpaceTooLarge over max_cells.
absl::StatusOr<SearchResult> SearchOptimalMechanism(const DataModel& model,
                                                    const SearchConfig& config);

// Same, maximizing the MAP error for h(X). NoPredicate without h.
absl::StatusOr<SearchResult> SearchOptimalPredicate(const DataModel& model,
                                                    const SearchConfig& config);

// Straight enumeration of Z^n with no shared code paths to the privacy
// module. EnumerationTooLarge when k^n exceeds cap.
absl::StatusOr<double> BruteForcePrivacy(const DataModel& model,
                                         std::span<const Mechanism> ws,
                                         uint64_t cap = 20'000'000);

inline constexpr std::string_view kRngAlgorithm = "mt19937_64+splitmix64-v1";

struct SimResult {
  int64_t trials = 0;
  int64_t errors = 0;
  double empirical_error = 0.0;
  // sqrt(p (1 - p) / trials) at the empirical frequency.
  double std_error = 0.0;
  uint64_t seed = 0;
  int workers = 1;
};

// Seed of worker `worker`: the (worker + 1)-th SplitMix64 output from `seed`.
uint64_t DeriveWorkerSeed(uint64_t seed, int worker);

// Samples X ~ P_X and Z_t ~ W_t(.|X) independently, estimates X by
// argmax_x P_X(x) prod_t W_t(z_t|x) (lowest index on ties) and counts
// misses. Trials split into contiguous blocks, one RNG per worker.
absl::StatusOr<SimResult> SimulateProtocol(const DataModel& model,
                                           std::span<const Mechanism> ws,
                                           int64_t trials, uint64_t seed,
                                           int workers = 1);

absl::StatusOr<SimResult> SimulateProtocolAddNoise(
    const DataModel& model, std::span<const AddNoiseMechanism> vs,
    int64_t trials, uint64_t seed, int workers = 1);

// |empirical - exact| <= sigmas * std_error. A zero standard error demands
// exact agreement.
bool WithinSigma(const SimResult& result, double exact, double sigmas = 4.0);

using Rational = boost::multiprecision::cpp_rational;
using RationalMatrix = std::vector<std::vector<Rational>>;

// Smallest-denominator fraction within tol of x, by continued fractions.
// NotRational if none has denominator <= max_denominator.
absl::StatusOr<Rational> ToRational(double x, int64_t max_denominator = 1'000'000,
                                    double tol = 1e-12);

absl::StatusOr<RationalMatrix> ToRationalMatrix(
    const Matrix& m, int64_t max_denominator = 1'000'000, double tol = 1e-12);

// Exact MAP error 1 - sum_z max_x P_X(x) prod_t W_t(z_t|x). Inputs must sum
// to one exactly (NotNormalized, NotStochastic).
absl::StatusOr<Rational> RationalPrivacy(std::span<const Rational> px,
                                         std::span<const RationalMatrix> ws);

struct RationalCheck {
  Rational exact;
  double exact_as_double = 0.0;
  double float_value = 0.0;
  bool agree = false;
};

// Converts the model and channels to fractions, evaluates exactly and
// compares with PrivacyMulti within 1e-12.
absl::StatusOr<RationalCheck> RationalCrossCheck(const DataModel& model,
                                                 std::span<const Mechanism> ws);

double ToDouble(const Rational& q);

// Uniform on [0, 1) from the top 53 bits, independent of the standard
// library's distribution implementations.
double UniformUnit(std::mt19937_64& rng);

// A random mechanism with W(f(x)|x) drawn uniformly from [rho, 1] and the
// remainder split by uniform weights.
Mechanism RandomFeasibleMechanism(const DataModel& model, double rho,
                                  std::mt19937_64& rng);

}  // namespace rho_privacy

#endif  // RHO_PRIVACY_ORACLE_H_
