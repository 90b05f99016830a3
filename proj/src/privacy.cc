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

#include "rho_privacy/privacy.h"

#include <cmath>
#include <limits>
#include <memory>
#include <utility>

#include "absl/strings/str_cat.h"
#include "rho_privacy/numeric.h"
#include "rho_privacy/status.h"
#include "rho_privacy/status_macros.h"

namespace rho_privacy {

std::string_view PrivacyMethodName(PrivacyMethod method) {
  switch (method) {
    case PrivacyMethod::kSingle:
      return "single";
    case PrivacyMethod::kNaiveEnumeration:
      return "naive-enumeration";
    case PrivacyMethod::kTypeClass:
      return "type-class";
    case PrivacyMethod::kReducedSupport:
      return "reduced-support";
  }
  return "unknown";
}

namespace {

// Competing hypotheses, each with a prior weight and one channel row per
// response. Hypotheses are pooled into groups; the estimator picks the group
// of largest joint mass and reports its representative.
struct Problem {
  std::vector<double> prior;
  std::vector<int> group;
  std::vector<int> representative;  // per group
  std::vector<Matrix> channels;     // channels[t][hypothesis][response]
  int k = 0;

  int hypotheses() const { return static_cast<int>(prior.size()); }
  int groups() const { return static_cast<int>(representative.size()); }
  int n() const { return static_cast<int>(channels.size()); }
};

// Singleton groups, representative = hypothesis index.
void UseSingletonGroups(Problem& p) {
  p.group.resize(p.hypotheses());
  p.representative.resize(p.hypotheses());
  for (int h = 0; h < p.hypotheses(); ++h) p.group[h] = p.representative[h] = h;
}

Problem DataProblem(const DataModel& model, std::span<const Mechanism> ws) {
  Problem p;
  p.prior = model.px();
  p.k = ws.empty() ? model.k() : ws[0].cols();
  for (const Mechanism& w : ws) p.channels.push_back(w.matrix());
  UseSingletonGroups(p);
  return p;
}

// Largest group mass for a response tuple, with per-hypothesis weights.
int BestGroup(const Problem& p, std::span<const long double> weights,
              std::vector<long double>& scratch, long double* best_mass) {
  scratch.assign(p.groups(), 0.0L);
  for (int h = 0; h < p.hypotheses(); ++h) scratch[p.group[h]] += weights[h];
  int best = 0;
  for (int g = 1; g < p.groups(); ++g) {
    if (scratch[g] > scratch[best]) best = g;
  }
  if (best_mass != nullptr) *best_mass = scratch[best];
  return best;
}

DecisionRule MakeRule(std::shared_ptr<const Problem> p) {
  return [p](std::span<const int> responses) {
    std::vector<long double> weights(p->prior.begin(), p->prior.end());
    for (size_t t = 0; t < responses.size(); ++t) {
      const Matrix& w = p->channels[t % p->channels.size()];
      for (int h = 0; h < p->hypotheses(); ++h) {
        weights[h] *= w[h][responses[t]];
      }
    }
    std::vector<long double> scratch;
    return p->representative[BestGroup(*p, weights, scratch, nullptr)];
  };
}

double Reduce(const std::vector<double>& partials) {
  CompensatedSum sum;
  for (double v : partials) sum.Add(v);
  return sum.Total();
}

// Σ over Z^n of max_g Σ_{h in g} prior[h] Π_t W_t(z_t|h).
double EnumerateSuccess(const Problem& p, int workers) {
  const int n = p.n();
  const int k = p.k;
  const int hyp = p.hypotheses();
  const uint64_t total = SaturatingPow(k, n);
  auto chunk = [&](uint64_t begin, uint64_t end) {
    if (begin >= end) return 0.0;
    std::vector<int> digits(n);
    uint64_t code = begin;
    for (int t = n - 1; t >= 0; --t) {
      digits[t] = static_cast<int>(code % k);
      code /= k;
    }
    // prefix[t][h] = prior[h] Π_{s<t} W_s(z_s|h).
    std::vector<std::vector<long double>> prefix(
        n + 1, std::vector<long double>(hyp));
    for (int h = 0; h < hyp; ++h) prefix[0][h] = p.prior[h];
    auto refresh = [&](int from) {
      for (int t = from; t < n; ++t) {
        for (int h = 0; h < hyp; ++h) {
          prefix[t + 1][h] = prefix[t][h] * p.channels[t][h][digits[t]];
        }
      }
    };
    refresh(0);
    std::vector<long double> scratch;
    CompensatedSum sum;
    for (uint64_t index = begin;;) {
      long double best = 0.0L;
      BestGroup(p, prefix[n], scratch, &best);
      sum.Add(static_cast<double>(best));
      if (++index >= end) break;
      int pos = n - 1;
      while (digits[pos] == k - 1) digits[pos--] = 0;
      ++digits[pos];
      refresh(pos);
    }
    return sum.Total();
  };
  return Reduce(ParallelChunks(total, workers, chunk));
}

// Same sum for n copies of one channel, visiting response types only.
double TypeClassSuccess(const Problem& p, int n, int workers) {
  const int k = p.k;
  const int hyp = p.hypotheses();
  const Matrix& w = p.channels[0];
  constexpr long double kNegInf = -std::numeric_limits<long double>::infinity();
  std::vector<std::vector<long double>> log_w(hyp, std::vector<long double>(k));
  std::vector<long double> log_prior(hyp);
  for (int h = 0; h < hyp; ++h) {
    log_prior[h] = std::log(static_cast<long double>(p.prior[h]));
    for (int i = 0; i < k; ++i) {
      log_w[h][i] = w[h][i] > 0.0 ? std::log(static_cast<long double>(w[h][i]))
                                  : kNegInf;
    }
  }
  const uint64_t total = CompositionCount(n, k);
  auto chunk = [&](uint64_t begin, uint64_t end) {
    CompositionIterator it(n, k);
    for (uint64_t skip = 0; skip < begin; ++skip) it.Next();
    std::vector<long double> weights(hyp);
    std::vector<long double> scratch;
    CompensatedSum sum;
    for (uint64_t index = begin; index < end && !it.done(); ++index, it.Next()) {
      const std::span<const int> c = it.counts();
      const long double log_mult = LogMultinomial(c);
      for (int h = 0; h < hyp; ++h) {
        long double log_term = log_mult + log_prior[h];
        for (int i = 0; i < k; ++i) {
          if (c[i] > 0) log_term += c[i] * log_w[h][i];
        }
        weights[h] = log_term == kNegInf ? 0.0L : std::exp(log_term);
      }
      long double best = 0.0L;
      BestGroup(p, weights, scratch, &best);
      sum.Add(static_cast<double>(best));
    }
    return sum.Total();
  };
  return Reduce(ParallelChunks(total, workers, chunk));
}

bool AllEqual(std::span<const Matrix> channels) {
  for (const Matrix& w : channels) {
    if (w != channels[0]) return false;
  }
  return true;
}

// Shared driver: picks a path, enforces the cap and returns the success
// probability together with the method used.
absl::StatusOr<std::pair<double, PrivacyMethod>> Success(
    const Problem& p, const EnumerationOptions& options,
    PrivacyMethod equal_method = PrivacyMethod::kTypeClass) {
  const int n = p.n();
  const bool equal = AllEqual(p.channels);
  bool use_types = false;
  switch (options.path) {
    case MultiPath::kAuto:
      use_types = equal;
      break;
    case MultiPath::kTypeClass:
      if (!equal) {
        return MakeError(ErrorCode::kShapeMismatch,
                         "type-class path needs identical channels");
      }
      use_types = true;
      break;
    case MultiPath::kNaive:
      break;
  }
  const int workers = std::max(1, options.workers);
  if (use_types) {
    const uint64_t count = CompositionCount(n, p.k);
    if (count > options.cap) {
      return MakeError(ErrorCode::kEnumerationTooLarge,
                       absl::StrCat(count, " response types exceed the cap ",
                                    options.cap));
    }
    return std::make_pair(TypeClassSuccess(p, n, workers), equal_method);
  }
  const uint64_t count = SaturatingPow(p.k, n);
  if (count > options.cap) {
    return MakeError(
        ErrorCode::kEnumerationTooLarge,
        absl::StrCat("k^n = ", p.k, "^", n, " = ", count,
                     " response tuples exceed the cap ", options.cap,
                     "; needs cap >= ", count));
  }
  return std::make_pair(EnumerateSuccess(p, workers),
                        PrivacyMethod::kNaiveEnumeration);
}

absl::Status CheckChannels(const DataModel& model,
                           std::span<const Mechanism> ws) {
  if (ws.empty()) {
    return MakeError(ErrorCode::kShapeMismatch, "no mechanisms given");
  }
  for (const Mechanism& w : ws) {
    if (w.rows() != model.r() || w.cols() != ws[0].cols()) {
      return MakeError(ErrorCode::kShapeMismatch,
                       "mechanism shapes disagree with the model");
    }
  }
  return absl::OkStatus();
}

PrivacyReport MakeReport(double success, PrivacyMethod method,
                         std::shared_ptr<const Problem> p) {
  PrivacyReport report;
  report.success = success;
  report.value = 1.0 - success;
  report.method = method;
  report.decision_rule = MakeRule(std::move(p));
  return report;
}

}  // namespace

int MapEstimate(const DataModel& model, const Mechanism& w, int response) {
  int best = 0;
  double best_mass = -1.0;
  for (int x = 0; x < model.r(); ++x) {
    const double mass = model.px(x) * w.at(x, response);
    if (mass > best_mass) {
      best = x;
      best_mass = mass;
    }
  }
  return best;
}

PrivacyReport PrivacySingle(const DataModel& model, const Mechanism& w) {
  CompensatedSum success;
  CompensatedSum error;
  std::vector<double> per_output(w.cols(), 0.0);
  for (int i = 0; i < w.cols(); ++i) {
    CompensatedSum column;
    double best = 0.0;
    for (int x = 0; x < model.r(); ++x) {
      const double mass = model.px(x) * w.at(x, i);
      column.Add(mass);
      best = std::max(best, mass);
    }
    success.Add(best);
    per_output[i] = column.Total() - best;
    error.Add(per_output[i]);
  }
  auto problem = std::make_shared<Problem>(
      DataProblem(model, std::span<const Mechanism>(&w, 1)));
  PrivacyReport report =
      MakeReport(success.Total(), PrivacyMethod::kSingle, std::move(problem));
  report.per_output_error = std::move(per_output);
  return report;
}

absl::StatusOr<PrivacyReport> PrivacyMulti(const DataModel& model,
                                           std::span<const Mechanism> ws,
                                           const EnumerationOptions& options) {
  RHO_RETURN_IF_ERROR(CheckChannels(model, ws));
  if (ws.size() == 1 && options.path == MultiPath::kAuto) {
    return PrivacySingle(model, ws[0]);
  }
  auto problem = std::make_shared<Problem>(DataProblem(model, ws));
  RHO_ASSIGN_OR_RETURN(auto result, Success(*problem, options));
  return MakeReport(result.first, result.second, std::move(problem));
}

absl::StatusOr<PrivacyReport> PrivacyMultiAddNoise(
    const DataModel& model, std::span<const AddNoiseMechanism> vs,
    const EnumerationOptions& options) {
  if (vs.empty()) {
    return MakeError(ErrorCode::kShapeMismatch, "no mechanisms given");
  }
  for (const AddNoiseMechanism& v : vs) {
    if (v.k() != model.k()) {
      return MakeError(ErrorCode::kShapeMismatch,
                       absl::StrCat("mechanism is ", v.k(), "x", v.k(),
                                    ", model has k = ", model.k()));
    }
  }
  const SupportStats stats = ComputeSupportStats(model);
  auto problem = std::make_shared<Problem>();
  problem->k = model.k();
  for (const AddNoiseMechanism& v : vs) problem->channels.push_back(v.matrix());
  problem->prior = stats.x_i_star_mass;
  UseSingletonGroups(*problem);
  problem->representative = stats.x_i_star;

  bool equal = AllEqual(problem->channels);
  if (equal && options.path != MultiPath::kNaive) {
    // Normalized prior of f̃(X); the success of estimating X is Σ times the
    // success of estimating f̃(X).
    for (int j = 0; j < model.k(); ++j) {
      problem->prior[j] = stats.x_i_star_mass[j] / stats.sum_xi_star;
    }
    EnumerationOptions typed = options;
    typed.path = MultiPath::kTypeClass;
    RHO_ASSIGN_OR_RETURN(
        auto result, Success(*problem, typed, PrivacyMethod::kReducedSupport));
    return MakeReport(stats.sum_xi_star * result.first, result.second,
                      std::move(problem));
  }
  EnumerationOptions naive = options;
  naive.path = MultiPath::kNaive;
  RHO_ASSIGN_OR_RETURN(auto result, Success(*problem, naive));
  return MakeReport(result.first, result.second, std::move(problem));
}

absl::StatusOr<PrivacyReport> PredicatePrivacy(const DataModel& model,
                                               const Mechanism& w) {
  if (!model.has_predicate()) {
    return MakeError(ErrorCode::kNoPredicate,
                     "the model carries no predicate h");
  }
  RHO_RETURN_IF_ERROR(CheckChannels(model, std::span<const Mechanism>(&w, 1)));
  auto problem = std::make_shared<Problem>();
  problem->prior = model.px();
  problem->k = w.cols();
  problem->channels.push_back(w.matrix());
  problem->group = model.h();
  problem->representative.resize(model.m());
  for (int j = 0; j < model.m(); ++j) problem->representative[j] = j;
  const double success = EnumerateSuccess(*problem, 1);
  return MakeReport(success, PrivacyMethod::kSingle, std::move(problem));
}

absl::StatusOr<double> FunctionRecoveryProbability(
    const DataModel& model, std::span<const Mechanism> ws,
    const EnumerationOptions& options) {
  RHO_RETURN_IF_ERROR(CheckChannels(model, ws));
  Problem problem = DataProblem(model, ws);
  problem.group = model.f();
  problem.representative.resize(model.k());
  for (int j = 0; j < model.k(); ++j) problem.representative[j] = j;
  RHO_ASSIGN_OR_RETURN(auto result, Success(problem, options));
  return result.first;
}

}  // namespace rho_privacy
