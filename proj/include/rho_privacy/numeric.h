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

#ifndef RHO_PRIVACY_NUMERIC_H_
#define RHO_PRIVACY_NUMERIC_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace rho_privacy {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void Add(double x);
  double Total() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double Log2(double x);

// log C(n, k) in natural log, extended precision.
long double LogBinomial(int n, int k);

// log [n! / (c_0! ... c_{k-1}!)] in natural log.
long double LogMultinomial(std::span<const int> counts);

// Number of weak compositions of n into k parts, C(n+k-1, k-1). Saturates at
// UINT64_MAX.
uint64_t CompositionCount(int n, int k);

// k^n, saturating at UINT64_MAX.
uint64_t SaturatingPow(uint64_t k, int n);

// Steps through every weak composition (c_0, ..., c_{k-1}) of n in
// lexicographic order, starting from (n, 0, ..., 0) and ending at
// (0, ..., 0, n).
class CompositionIterator {
 public:
  CompositionIterator(int n, int k);

  std::span<const int> counts() const { return counts_; }
  bool done() const { return done_; }
  void Next();

 private:
  std::vector<int> counts_;
  bool done_ = false;
};

// Steps through Z^n as an odometer with the last position varying fastest.
class TupleIterator {
 public:
  TupleIterator(int k, int n);

  std::span<const int> tuple() const { return tuple_; }
  bool done() const { return done_; }
  void Next();

 private:
  int k_;
  std::vector<int> tuple_;
  bool done_ = false;
};

// Splits [0, total) into `workers` contiguous chunks, runs `chunk_fn(begin,
// end)` on each (in parallel when workers > 1) and returns the partial
// results in chunk order. The caller reduces them in that order, so results
// are reproducible for a fixed worker count.
std::vector<double> ParallelChunks(
    uint64_t total, int workers,
    const std::function<double(uint64_t, uint64_t)>& chunk_fn);

// Lowest index attaining the maximum.
int ArgMax(std::span<const double> values);

}  // namespace rho_privacy

#endif  // RHO_PRIVACY_NUMERIC_H_
