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

#include "rho_privacy/numeric.h"

#include <algorithm>
#include <cmath>
#include <thread>

namespace rho_privacy {

void CompensatedSum::Add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

double Log2(double x) { return std::log2(x); }

long double LogBinomial(int n, int k) {
  if (k < 0 || k > n) return -std::numeric_limits<long double>::infinity();
  return std::lgamma(static_cast<long double>(n) + 1.0L) -
         std::lgamma(static_cast<long double>(k) + 1.0L) -
         std::lgamma(static_cast<long double>(n - k) + 1.0L);
}

long double LogMultinomial(std::span<const int> counts) {
  int n = 0;
  long double result = 0.0L;
  for (int c : counts) {
    n += c;
    result -= std::lgamma(static_cast<long double>(c) + 1.0L);
  }
  return result + std::lgamma(static_cast<long double>(n) + 1.0L);
}

uint64_t CompositionCount(int n, int k) {
  // C(n + k - 1, k - 1) via the multiplicative formula, exact while it fits.
  const int top = n + k - 1;
  const int choose = std::min(k - 1, n);
  unsigned __int128 value = 1;
  for (int i = 1; i <= choose; ++i) {
    value = value * static_cast<unsigned>(top - choose + i) / i;
    if (value > std::numeric_limits<uint64_t>::max()) {
      return std::numeric_limits<uint64_t>::max();
    }
  }
  return static_cast<uint64_t>(value);
}

uint64_t SaturatingPow(uint64_t k, int n) {
  unsigned __int128 value = 1;
  for (int i = 0; i < n; ++i) {
    value *= k;
    if (value > std::numeric_limits<uint64_t>::max()) {
      return std::numeric_limits<uint64_t>::max();
    }
  }
  return static_cast<uint64_t>(value);
}

CompositionIterator::CompositionIterator(int n, int k) : counts_(k, 0) {
  counts_[0] = n;
  done_ = k <= 0;
}

void CompositionIterator::Next() {
  const int k = static_cast<int>(counts_.size());
  if (k == 1) {
    done_ = true;
    return;
  }
  // Find the rightmost nonzero entry before the last slot, move one unit to
  // its right neighbour, and sweep everything after it into that neighbour.
  int pivot = k - 2;
  while (pivot >= 0 && counts_[pivot] == 0) --pivot;
  if (pivot < 0) {
    done_ = true;
    return;
  }
  counts_[pivot] -= 1;
  const int tail = counts_[k - 1];
  counts_[k - 1] = 0;
  counts_[pivot + 1] += 1 + tail;
}

TupleIterator::TupleIterator(int k, int n) : k_(k), tuple_(n, 0) {
  done_ = k <= 0;
}

void TupleIterator::Next() {
  for (int pos = static_cast<int>(tuple_.size()) - 1; pos >= 0; --pos) {
    if (++tuple_[pos] < k_) return;
    tuple_[pos] = 0;
  }
  done_ = true;
}

std::vector<double> ParallelChunks(
    uint64_t total, int workers,
    const std::function<double(uint64_t, uint64_t)>& chunk_fn) {
  workers = std::max(1, workers);
  if (static_cast<uint64_t>(workers) > total) {
    workers = static_cast<int>(std::max<uint64_t>(1, total));
  }
  std::vector<double> partial(workers, 0.0);
  const uint64_t base = total / workers;
  const uint64_t extra = total % workers;
  std::vector<std::pair<uint64_t, uint64_t>> ranges;
  uint64_t begin = 0;
  for (int w = 0; w < workers; ++w) {
    const uint64_t len = base + (static_cast<uint64_t>(w) < extra ? 1 : 0);
    ranges.emplace_back(begin, begin + len);
    begin += len;
  }
  if (workers == 1) {
    partial[0] = chunk_fn(ranges[0].first, ranges[0].second);
    return partial;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      partial[w] = chunk_fn(ranges[w].first, ranges[w].second);
    });
  }
  for (std::thread& t : threads) t.join();
  return partial;
}

int ArgMax(std::span<const double> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace rho_privacy
