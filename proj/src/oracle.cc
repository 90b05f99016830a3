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

#include "rho_privacy/oracle.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>
#include <utility>

#include "absl/strings/str_cat.h"
#include "rho_privacy/bounds.h"
#include "rho_privacy/numeric.h"
#include "rho_privacy/status.h"
#include "rho_privacy/status_macros.h"

namespace rho_privacy {
namespace {

using Units = std::vector<int>;

// All rows on the grid with at least `floor_units` of mass on `target`.
std::vector<Units> RowCandidates(int units, int k, int target,
                                 int floor_units) {
  std::vector<Units> rows;
  for (CompositionIterator it(units - floor_units, k); !it.done(); it.Next()) {
    Units row(it.counts().begin(), it.counts().end());
    row[target] += floor_units;
    rows.push_back(std::move(row));
  }
  return rows;
}

// Shared grid set-up for both searches.
struct Grid {
  int units = 0;
  // candidates[j]: rows for data symbols whose f-value is j.
  std::vector<std::vector<Units>> candidates;
  uint64_t total = 0;
};

absl::StatusOr<Grid> MakeGrid(const DataModel& model,
                              const SearchConfig& config) {
  if (!(config.grid_step > 0.0) || config.grid_step > 1.0) {
    return MakeError(ErrorCode::kInvalidGridStep,
                     absl::StrCat("grid step ", config.grid_step));
  }
  const double inverse = 1.0 / config.grid_step;
  const long units = std::lround(inverse);
  if (std::abs(inverse - static_cast<double>(units)) > 1e-9 * inverse) {
    return MakeError(ErrorCode::kInvalidGridStep,
                     absl::StrCat("grid step ", config.grid_step,
                                  " does not divide 1"));
  }
  Grid grid;
  grid.units = static_cast<int>(units);
  const int floor_units = std::min<int>(
      grid.units,
      static_cast<int>(std::ceil(config.rho * grid.units - 1e-9)));
  const uint64_t per_row =
      CompositionCount(grid.units - floor_units, model.k());
  grid.total = 1;
  for (int x = 0; x < model.r(); ++x) {
    if (grid.total > config.max_cells / std::max<uint64_t>(per_row, 1)) {
      return MakeError(ErrorCode::kSearchSpaceTooLarge,
                       absl::StrCat(per_row, "^", model.r(),
                                    " candidates exceed the cap of ",
                                    config.max_cells));
    }
    grid.total *= per_row;
  }
  for (int j = 0; j < model.k(); ++j) {
    grid.candidates.push_back(
        RowCandidates(grid.units, model.k(), j, floor_units));
  }
  return grid;
}

// Depth-first walk over rows. Each node folds one row into `acc`, an m x k
// table of joint masses per target value; the MAP error at a leaf is
// 1 - sum_z max_t acc[t][z].
template <typename Number>
class Search {
 public:
  Search(const DataModel& model, const Grid& grid, std::vector<int> target,
         int num_targets)
      : model_(model), grid_(grid), target_(std::move(target)),
        num_targets_(num_targets) {
    for (int x = 0; x < model.r(); ++x) mass_.push_back(Number(model.px(x)));
    inv_units_ = Number(1) / Number(grid.units);
  }

  struct Best {
    Number value = Number(-1);
    std::vector<int> choice;
    uint64_t visited = 0;
  };

  Best RunRange(size_t first_begin, size_t first_end) {
    Best best;
    const int k = model_.k();
    std::vector<std::vector<Number>> acc(num_targets_, std::vector<Number>(k));
    std::vector<int> choice(model_.r(), 0);
    const auto& first = grid_.candidates[model_.f(0)];
    for (size_t c = first_begin; c < first_end; ++c) {
      choice[0] = static_cast<int>(c);
      std::vector<std::vector<Number>> start = acc;
      Fold(start, 0, first[c]);
      Descend(1, start, choice, best);
    }
    return best;
  }

 private:
  void Fold(std::vector<std::vector<Number>>& acc, int x, const Units& row) {
    for (size_t z = 0; z < row.size(); ++z) {
      if (row[z] == 0) continue;
      acc[target_[x]][z] += mass_[x] * Number(row[z]) * inv_units_;
    }
  }

  void Descend(int x, const std::vector<std::vector<Number>>& acc,
               std::vector<int>& choice, Best& best) {
    if (x == model_.r()) {
      ++best.visited;
      Number success = Number(0);
      for (int z = 0; z < model_.k(); ++z) {
        Number top = acc[0][z];
        for (int t = 1; t < num_targets_; ++t) top = std::max(top, acc[t][z]);
        success += top;
      }
      const Number value = Number(1) - success;
      if (value > best.value) {
        best.value = value;
        best.choice = choice;
      }
      return;
    }
    const auto& rows = grid_.candidates[model_.f(x)];
    std::vector<std::vector<Number>> next;
    for (size_t c = 0; c < rows.size(); ++c) {
      choice[x] = static_cast<int>(c);
      next = acc;
      Fold(next, x, rows[c]);
      Descend(x + 1, next, choice, best);
    }
  }

  const DataModel& model_;
  const Grid& grid_;
  std::vector<int> target_;
  int num_targets_;
  std::vector<Number> mass_;
  Number inv_units_;
};

double AsDouble(double x) { return x; }
double AsDouble(const Rational& q) { return ToDouble(q); }

template <typename Number>
SearchResult RunSearch(const DataModel& model, const Grid& grid,
                       std::vector<int> target, int num_targets, int workers) {
  Search<Number> search(model, grid, std::move(target), num_targets);
  const size_t first = grid.candidates[model.f(0)].size();
  workers = std::clamp<int>(workers, 1, static_cast<int>(first));
  std::vector<typename Search<Number>::Best> partial(workers);
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    const size_t begin = first * w / workers;
    const size_t end = first * (w + 1) / workers;
    if (workers == 1) {
      partial[w] = search.RunRange(begin, end);
    } else {
      threads.emplace_back(
          [&, w, begin, end] { partial[w] = search.RunRange(begin, end); });
    }
  }
  for (auto& t : threads) t.join();
  // Chunks are in candidate order, so a strict comparison keeps the first
  // maximizer in enumeration order regardless of the worker count.
  typename Search<Number>::Best best = partial[0];
  uint64_t visited = partial[0].visited;
  for (int w = 1; w < workers; ++w) {
    visited += partial[w].visited;
    if (partial[w].value > best.value) best = partial[w];
  }
  SearchResult result;
  result.candidates = visited;
  result.best_value = AsDouble(best.value);
  for (int x = 0; x < model.r(); ++x) {
    const Units& row = grid.candidates[model.f(x)][best.choice[x]];
    std::vector<double> entries;
    for (int u : row) entries.push_back(static_cast<double>(u) / grid.units);
    result.best.push_back(std::move(entries));
  }
  return result;
}

void Finish(SearchResult& result, const DataModel& model,
            const SearchConfig& config) {
  result.slack = model.r() * model.k() * config.grid_step;
  result.dominated = result.best_value <= result.closed_form + result.slack;
  result.constructed_within =
      result.constructed_value >= result.best_value - result.slack;
}

absl::StatusOr<SearchResult> SearchWithTargets(const DataModel& model,
                                               const SearchConfig& config,
                                               std::vector<int> target,
                                               int num_targets) {
  RHO_ASSIGN_OR_RETURN(Grid grid, MakeGrid(model, config));
  if (config.mode == ArithmeticMode::kRational) {
    return RunSearch<Rational>(model, grid, std::move(target), num_targets,
                               config.workers);
  }
  return RunSearch<double>(model, grid, std::move(target), num_targets,
                           config.workers);
}

absl::Status CheckChannels(const DataModel& model,
                           std::span<const Mechanism> ws) {
  if (ws.empty()) {
    return MakeError(ErrorCode::kShapeMismatch, "no channels given");
  }
  for (const Mechanism& w : ws) {
    if (w.rows() != model.r() || w.cols() != model.k()) {
      return MakeError(ErrorCode::kShapeMismatch,
                       absl::StrCat("channel is ", w.rows(), "x", w.cols(),
                                    ", expected ", model.r(), "x", model.k()));
    }
  }
  return absl::OkStatus();
}

uint64_t SplitMix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> Cumulative(std::span<const double> weights) {
  std::vector<double> cum(weights.size());
  double total = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    total += weights[i];
    cum[i] = total;
  }
  cum.back() = std::numeric_limits<double>::infinity();
  return cum;
}

// First index whose cumulative boundary exceeds u.
int Sample(const std::vector<double>& cum, double u) {
  return static_cast<int>(std::upper_bound(cum.begin(), cum.end(), u) -
                          cum.begin());
}

}  // namespace

absl::StatusOr<SearchResult> SearchOptimalMechanism(const DataModel& model,
                                                    const SearchConfig& config) {
  std::vector<int> identity(model.r());
  for (int x = 0; x < model.r(); ++x) identity[x] = x;
  RHO_ASSIGN_OR_RETURN(SearchResult result,
                       SearchWithTargets(model, config, identity, model.r()));
  const SupportStats stats = ComputeSupportStats(model);
  result.closed_form = RhoPrivacyClosed(stats, config.rho);
  result.constructed_value =
      PrivacySingle(model, BuildWo(model, stats, config.rho)).value;
  Finish(result, model, config);
  return result;
}

absl::StatusOr<SearchResult> SearchOptimalPredicate(const DataModel& model,
                                                    const SearchConfig& config) {
  if (!model.has_predicate()) {
    return MakeError(ErrorCode::kNoPredicate,
                     "the model carries no predicate h");
  }
  const SupportStats stats = ComputeSupportStats(model);
  RHO_ASSIGN_OR_RETURN(const double closed,
                       PredicatePrivacyClosed(stats, config.rho));
  RHO_ASSIGN_OR_RETURN(Mechanism wo,
                       BuildWoPredicate(model, stats, config.rho));
  RHO_ASSIGN_OR_RETURN(PrivacyReport constructed, PredicatePrivacy(model, wo));
  RHO_ASSIGN_OR_RETURN(
      SearchResult result,
      SearchWithTargets(model, config, model.h(), model.m()));
  result.closed_form = closed;
  result.constructed_value = constructed.value;
  Finish(result, model, config);
  return result;
}

absl::StatusOr<double> BruteForcePrivacy(const DataModel& model,
                                         std::span<const Mechanism> ws,
                                         uint64_t cap) {
  RHO_RETURN_IF_ERROR(CheckChannels(model, ws));
  const int n = static_cast<int>(ws.size());
  const uint64_t count = SaturatingPow(model.k(), n);
  if (count > cap) {
    return MakeError(ErrorCode::kEnumerationTooLarge,
                     absl::StrCat(count, " response tuples exceed the cap of ",
                                  cap));
  }
  CompensatedSum success;
  for (TupleIterator it(model.k(), n); !it.done(); it.Next()) {
    double top = 0.0;
    for (int x = 0; x < model.r(); ++x) {
      double joint = model.px(x);
      for (int t = 0; t < n; ++t) joint *= ws[t].at(x, it.tuple()[t]);
      top = std::max(top, joint);
    }
    success.Add(top);
  }
  return 1.0 - success.Total();
}

uint64_t DeriveWorkerSeed(uint64_t seed, int worker) {
  uint64_t state = seed;
  uint64_t out = 0;
  for (int i = 0; i <= worker; ++i) out = SplitMix64(state);
  return out;
}

absl::StatusOr<SimResult> SimulateProtocol(const DataModel& model,
                                           std::span<const Mechanism> ws,
                                           int64_t trials, uint64_t seed,
                                           int workers) {
  RHO_RETURN_IF_ERROR(CheckChannels(model, ws));
  if (trials < 1) {
    return MakeError(ErrorCode::kShapeMismatch,
                     absl::StrCat("trials must be positive, got ", trials));
  }
  workers = std::max(1, workers);
  const int n = static_cast<int>(ws.size());
  const int r = model.r();
  const std::vector<double> prior_cum = Cumulative(model.px());
  std::vector<std::vector<std::vector<double>>> row_cum(n);
  for (int t = 0; t < n; ++t) {
    for (int x = 0; x < r; ++x) row_cum[t].push_back(Cumulative(ws[t].row(x)));
  }
  std::vector<int64_t> misses(workers, 0);
  auto run = [&](int w) {
    const int64_t begin = trials * w / workers;
    const int64_t end = trials * (w + 1) / workers;
    std::mt19937_64 rng(DeriveWorkerSeed(seed, w));
    std::vector<int> z(n);
    int64_t local = 0;
    for (int64_t trial = begin; trial < end; ++trial) {
      const int x = Sample(prior_cum, UniformUnit(rng));
      for (int t = 0; t < n; ++t) z[t] = Sample(row_cum[t][x], UniformUnit(rng));
      int estimate = 0;
      long double top = -1.0L;
      for (int cand = 0; cand < r; ++cand) {
        long double joint = model.px(cand);
        for (int t = 0; t < n && joint > 0.0L; ++t) {
          joint *= ws[t].at(cand, z[t]);
        }
        if (joint > top) {
          top = joint;
          estimate = cand;
        }
      }
      if (estimate != x) ++local;
    }
    misses[w] = local;
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(run, w);
    for (auto& t : threads) t.join();
  }
  SimResult result;
  result.trials = trials;
  for (int64_t m : misses) result.errors += m;
  result.empirical_error =
      static_cast<double>(result.errors) / static_cast<double>(trials);
  const double p = result.empirical_error;
  result.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  result.seed = seed;
  result.workers = workers;
  return result;
}

absl::StatusOr<SimResult> SimulateProtocolAddNoise(
    const DataModel& model, std::span<const AddNoiseMechanism> vs,
    int64_t trials, uint64_t seed, int workers) {
  std::vector<Mechanism> ws;
  for (const AddNoiseMechanism& v : vs) {
    if (v.k() != model.k()) {
      return MakeError(ErrorCode::kShapeMismatch,
                       absl::StrCat("add-noise channel has ", v.k(),
                                    " rows, expected ", model.k()));
    }
    ws.push_back(LiftToW(v, model));
  }
  return SimulateProtocol(model, ws, trials, seed, workers);
}

bool WithinSigma(const SimResult& result, double exact, double sigmas) {
  return std::abs(result.empirical_error - exact) <= sigmas * result.std_error;
}

double ToDouble(const Rational& q) { return q.convert_to<double>(); }

double UniformUnit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Mechanism RandomFeasibleMechanism(const DataModel& model, double rho,
                                  std::mt19937_64& rng) {
  const int k = model.k();
  Matrix rows(model.r(), std::vector<double>(k, 0.0));
  for (int x = 0; x < model.r(); ++x) {
    const int target = model.f(x);
    const double diag = rho + (1.0 - rho) * UniformUnit(rng);
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      if (i != target) total += (rows[x][i] = UniformUnit(rng) + 1e-3);
    }
    for (int i = 0; i < k; ++i) {
      if (i != target) rows[x][i] *= (1.0 - diag) / total;
    }
    rows[x][target] = diag;
  }
  return Mechanism::FromTrustedRows(std::move(rows));
}

absl::StatusOr<Rational> ToRational(double x, int64_t max_denominator,
                                    double tol) {
  if (!std::isfinite(x)) {
    return MakeError(ErrorCode::kNotRational, absl::StrCat(x, " is not finite"));
  }
  // Convergents h/k of the continued fraction of x.
  using Int = boost::multiprecision::cpp_int;
  Int h_prev = 1, h = static_cast<int64_t>(std::floor(x));
  Int k_prev = 0, k = 1;
  double rest = x - std::floor(x);
  for (int step = 0; step < 64; ++step) {
    const Rational q(h, k);
    if (k > max_denominator) break;
    if (std::abs(ToDouble(q) - x) <= tol) return q;
    if (rest == 0.0) break;
    const double inv = 1.0 / rest;
    const double a = std::floor(inv);
    rest = inv - a;
    const Int ai = static_cast<int64_t>(a);
    Int h_next = ai * h + h_prev;
    Int k_next = ai * k + k_prev;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
  }
  return MakeError(ErrorCode::kNotRational,
                   absl::StrCat(x, " has no fraction with denominator <= ",
                                max_denominator, " within ", tol));
}

absl::StatusOr<RationalMatrix> ToRationalMatrix(const Matrix& m,
                                                int64_t max_denominator,
                                                double tol) {
  RationalMatrix out;
  for (const auto& row : m) {
    std::vector<Rational> converted;
    for (double v : row) {
      RHO_ASSIGN_OR_RETURN(Rational q, ToRational(v, max_denominator, tol));
      converted.push_back(std::move(q));
    }
    out.push_back(std::move(converted));
  }
  return out;
}

absl::StatusOr<Rational> RationalPrivacy(std::span<const Rational> px,
                                         std::span<const RationalMatrix> ws) {
  Rational total = 0;
  for (const Rational& p : px) total += p;
  if (total != 1) {
    return MakeError(ErrorCode::kNotNormalized,
                     absl::StrCat("prior sums to ", ToDouble(total)));
  }
  if (ws.empty()) {
    return MakeError(ErrorCode::kShapeMismatch, "no channels given");
  }
  const size_t k = ws[0].empty() ? 0 : ws[0][0].size();
  for (const RationalMatrix& w : ws) {
    if (w.size() != px.size()) {
      return MakeError(ErrorCode::kShapeMismatch,
                       absl::StrCat("channel has ", w.size(), " rows, expected ",
                                    px.size()));
    }
    for (const auto& row : w) {
      if (row.size() != k) {
        return MakeError(ErrorCode::kShapeMismatch, "ragged channel rows");
      }
      Rational sum = 0;
      for (const Rational& v : row) {
        if (v < 0) return MakeError(ErrorCode::kNotStochastic, "negative entry");
        sum += v;
      }
      if (sum != 1) {
        return MakeError(ErrorCode::kNotStochastic,
                         absl::StrCat("row sums to ", ToDouble(sum)));
      }
    }
  }
  const int n = static_cast<int>(ws.size());
  Rational success = 0;
  for (TupleIterator it(static_cast<int>(k), n); !it.done(); it.Next()) {
    Rational top = 0;
    for (size_t x = 0; x < px.size(); ++x) {
      Rational joint = px[x];
      for (int t = 0; t < n && joint != 0; ++t) joint *= ws[t][x][it.tuple()[t]];
      if (joint > top) top = joint;
    }
    success += top;
  }
  return Rational(1) - success;
}

absl::StatusOr<RationalCheck> RationalCrossCheck(const DataModel& model,
                                                 std::span<const Mechanism> ws) {
  RHO_RETURN_IF_ERROR(CheckChannels(model, ws));
  std::vector<Rational> px;
  for (int x = 0; x < model.r(); ++x) {
    RHO_ASSIGN_OR_RETURN(Rational q, ToRational(model.px(x)));
    px.push_back(std::move(q));
  }
  std::vector<RationalMatrix> exact_ws;
  for (const Mechanism& w : ws) {
    RHO_ASSIGN_OR_RETURN(RationalMatrix q, ToRationalMatrix(w.matrix()));
    exact_ws.push_back(std::move(q));
  }
  RationalCheck check;
  RHO_ASSIGN_OR_RETURN(check.exact, RationalPrivacy(px, exact_ws));
  check.exact_as_double = ToDouble(check.exact);
  RHO_ASSIGN_OR_RETURN(PrivacyReport report, PrivacyMulti(model, ws));
  check.float_value = report.value;
  check.agree = std::abs(check.exact_as_double - check.float_value) <= 1e-12;
  return check;
}

}  // namespace rho_privacy
