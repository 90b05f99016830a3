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

#include "rho_privacy/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <random>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "rho_privacy/bounds.h"
#include "rho_privacy/chernoff.h"
#include "rho_privacy/numeric.h"
#include "rho_privacy/oracle.h"
#include "rho_privacy/privacy.h"
#include "rho_privacy/status.h"
#include "rho_privacy/status_macros.h"

#ifndef RHO_PRIV_VERSION
#define RHO_PRIV_VERSION "0.0.0"
#endif

namespace rho_privacy::cli {
namespace {

constexpr std::string_view kToolName = "rhopriv";

absl::Status Invalid(std::string message) {
  return absl::InvalidArgumentError(message);
}

void DumpTo(const Json& j, int indent, std::string& out) {
  const std::string pad(indent, ' ');
  const std::string inner(indent + 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner;
        out += Json(it.key()).dump();
        out += ": ";
        DumpTo(it.value(), indent + 2, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) {
        return e.is_structured();
      });
      if (flat) {
        out += "[";
        for (size_t i = 0; i < j.size(); ++i) {
          if (i > 0) out += ", ";
          DumpTo(j[i], indent + 2, out);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (size_t i = 0; i < j.size(); ++i) {
        if (i > 0) out += ",\n";
        out += inner;
        DumpTo(j[i], indent + 2, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isfinite(v)) {
        out += FormatDouble(v);
      } else {
        out += "\"" + FormatDouble(v) + "\"";
      }
      return;
    }
    default:
      out += j.dump();
  }
}

absl::StatusOr<std::string> ReadSource(const std::string& path,
                                       std::istream& in) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(in), {});
  }
  std::ifstream file(path, std::ios::binary);
  if (!file) return Invalid(absl::StrCat("cannot read ", path));
  return std::string(std::istreambuf_iterator<char>(file), {});
}

absl::StatusOr<Json> ParseJson(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    return Invalid(absl::StrCat("malformed JSON: ", e.what()));
  }
}

absl::Status CheckRho(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    return Invalid(absl::StrCat("rho must lie in [0, 1], got ", rho));
  }
  return absl::OkStatus();
}

enum class Scheme { kWo, kVo, kWoPred, kWoDoublePrime, kV1, kV2 };

const std::vector<std::pair<std::string, Scheme>>& SchemeNames() {
  static const auto* names = new std::vector<std::pair<std::string, Scheme>>{
      {"wo", Scheme::kWo},         {"vo", Scheme::kVo},
      {"wo-pred", Scheme::kWoPred}, {"wo-dblprime", Scheme::kWoDoublePrime},
      {"v1", Scheme::kV1},         {"v2", Scheme::kV2}};
  return *names;
}

Scheme ParseScheme(const std::string& name) {
  for (const auto& [key, scheme] : SchemeNames()) {
    if (key == name) return scheme;
  }
  return Scheme::kWo;
}

std::vector<std::string> SchemeKeys() {
  std::vector<std::string> keys;
  for (const auto& entry : SchemeNames()) keys.push_back(entry.first);
  return keys;
}

// One constructed mechanism: either a channel on the data alphabet or an
// add-noise channel on the function values.
struct Built {
  std::optional<Mechanism> w;
  std::optional<AddNoiseMechanism> v;
};

absl::StatusOr<Built> BuildScheme(const DataModel& model,
                                  const SupportStats& stats, Scheme scheme,
                                  double rho) {
  Built built;
  switch (scheme) {
    case Scheme::kWo:
      built.w = BuildWo(model, stats, rho);
      break;
    case Scheme::kVo:
      built.v = BuildVo(model, stats, rho);
      break;
    case Scheme::kWoPred: {
      RHO_ASSIGN_OR_RETURN(Mechanism w, BuildWoPredicate(model, stats, rho));
      built.w = std::move(w);
      break;
    }
    case Scheme::kWoDoublePrime: {
      RHO_ASSIGN_OR_RETURN(Mechanism w, BuildWoDoublePrime(model, stats, rho));
      built.w = std::move(w);
      break;
    }
    case Scheme::kV1:
      if (!(rho > 0.5 && rho <= 1.0)) {
        return MakeError(ErrorCode::kRhoOutOfRealm,
                         absl::StrCat("v1 needs 0.5 < rho <= 1, got ", rho));
      }
      built.v = BuildV1ForModel(model, rho);
      break;
    case Scheme::kV2: {
      RHO_ASSIGN_OR_RETURN(AddNoiseMechanism v, BuildV2ForModel(model, rho));
      built.v = std::move(v);
      break;
    }
  }
  return built;
}

Json MatrixJson(const Matrix& m) {
  Json rows = Json::array();
  for (const auto& row : m) rows.push_back(Json(row));
  return rows;
}

Json Optional(const std::optional<double>& value) {
  return value.has_value() ? Json(*value) : Json(nullptr);
}

Json Header(std::string_view command, const Instance& instance, double rho,
            int n, std::vector<std::string> methods,
            std::vector<uint64_t> seeds) {
  Json j;
  j["tool"] = std::string(kToolName);
  j["version"] = std::string(ToolVersion());
  j["command"] = std::string(command);
  j["instance_digest"] = instance.digest;
  j["rho"] = rho;
  j["n"] = n;
  j["method"] = methods;
  j["seeds"] = seeds;
  return j;
}

// Settings shared by every subcommand.
struct Common {
  std::string in = "-";
  std::string out;
  int workers = 1;
};

absl::Status Emit(const Common& common, const std::string& text,
                  std::ostream& out) {
  if (common.out.empty() || common.out == "-") {
    out << text;
    return absl::OkStatus();
  }
  std::ofstream file(common.out, std::ios::binary);
  if (!file) return Invalid(absl::StrCat("cannot write ", common.out));
  file << text;
  return absl::OkStatus();
}

absl::StatusOr<Instance> LoadInstance(const Common& common, std::istream& in) {
  RHO_ASSIGN_OR_RETURN(std::string text, ReadSource(common.in, in));
  return ParseInstance(text);
}

// ---- mechanism ----------------------------------------------------------

struct MechanismArgs {
  double rho = 0.0;
  std::string scheme = "wo";
};

absl::StatusOr<std::string> RunMechanism(const Common& common,
                                         const MechanismArgs& args,
                                         std::istream& in) {
  RHO_RETURN_IF_ERROR(CheckRho(args.rho));
  RHO_ASSIGN_OR_RETURN(Instance instance, LoadInstance(common, in));
  const DataModel& model = instance.model;
  const SupportStats stats = ComputeSupportStats(model);
  const Scheme scheme = ParseScheme(args.scheme);
  RHO_ASSIGN_OR_RETURN(Built built,
                       BuildScheme(model, stats, scheme, args.rho));
  Json j = Header("mechanism", instance, args.rho, 1, {args.scheme}, {});
  j["scheme"] = args.scheme;
  if (built.w.has_value()) {
    j["kind"] = "channel";
    j["rows"] = built.w->rows();
    j["cols"] = built.w->cols();
    j["recoverability_level"] = RecoverabilityLevel(*built.w, model);
    j["matrix"] = MatrixJson(built.w->matrix());
  } else {
    j["kind"] = "add-noise";
    j["rows"] = built.v->rows();
    j["cols"] = built.v->cols();
    j["recoverability_level"] = RecoverabilityLevel(*built.v);
    j["matrix"] = MatrixJson(built.v->matrix());
  }
  j["labels"] = instance.labels;
  Json construction;
  construction["rho_c"] = stats.rho_c;
  construction["effective_level"] = std::max(stats.rho_c, args.rho);
  construction["sum_top_mass"] = stats.sum_xi_star;
  construction["rho_c_prime"] =
      stats.predicate.has_value() ? Json(stats.predicate->rho_c_prime)
                                  : Json(nullptr);
  construction["canonical_permutation"] = CanonicalPermutation(stats);
  j["construction"] = construction;
  return DumpJson(j) + "\n";
}

// ---- privacy ------------------------------------------------------------

struct PrivacyArgs {
  double rho = 0.0;
  std::string scheme = "wo";
  int n = 1;
  bool exact = false;
  bool simulate = false;
  int64_t trials = 1'000'000;
  uint64_t seed = 0;
  uint64_t cap = 20'000'000;
};

Json BoundsJson(const BoundsReport& b) {
  Json j;
  j["pi_rho"] = b.pi_rho;
  j["converse_upper"] = b.converse_upper;
  j["gamma_n"] = b.gamma_n;
  j["lambda_n"] = b.lambda_n;
  j["achievability_lower_v1"] = Optional(b.achiev_lower_v1);
  j["closed_v2"] = Optional(b.closed_v2);
  j["limit_value"] = b.limit_value;
  j["rate_bits"] = b.rate_bits;
  return j;
}

absl::StatusOr<std::string> RunPrivacy(const Common& common,
                                       const PrivacyArgs& args,
                                       std::istream& in) {
  RHO_RETURN_IF_ERROR(CheckRho(args.rho));
  if (args.n < 1) return Invalid(absl::StrCat("n must be >= 1, got ", args.n));
  if (args.simulate && args.trials < 1) {
    return Invalid(absl::StrCat("trials must be >= 1, got ", args.trials));
  }
  RHO_ASSIGN_OR_RETURN(Instance instance, LoadInstance(common, in));
  const DataModel& model = instance.model;
  const SupportStats stats = ComputeSupportStats(model);
  RHO_ASSIGN_OR_RETURN(Built built,
                       BuildScheme(model, stats, ParseScheme(args.scheme),
                                   args.rho));
  if (args.simulate) {
    absl::StatusOr<SimResult> sim;
    if (built.w.has_value()) {
      std::vector<Mechanism> ws(args.n, *built.w);
      sim = SimulateProtocol(model, ws, args.trials, args.seed, common.workers);
    } else {
      std::vector<AddNoiseMechanism> vs(args.n, *built.v);
      sim = SimulateProtocolAddNoise(model, vs, args.trials, args.seed,
                                     common.workers);
    }
    RHO_RETURN_IF_ERROR(sim.status());
    Json j = Header("privacy", instance, args.rho, args.n, {"monte-carlo"},
                    {args.seed});
    j["scheme"] = args.scheme;
    j["mode"] = "simulate";
    j["rng"] = std::string(kRngAlgorithm);
    j["workers"] = sim->workers;
    j["trials"] = sim->trials;
    j["errors"] = sim->errors;
    j["empirical_error"] = sim->empirical_error;
    j["std_error"] = sim->std_error;
    return DumpJson(j) + "\n";
  }
  EnumerationOptions options;
  options.cap = args.cap;
  options.workers = common.workers;
  absl::StatusOr<PrivacyReport> report;
  std::optional<double> predicate_value;
  if (built.w.has_value()) {
    std::vector<Mechanism> ws(args.n, *built.w);
    report = PrivacyMulti(model, ws, options);
    if (args.n == 1 && model.has_predicate()) {
      RHO_ASSIGN_OR_RETURN(PrivacyReport p, PredicatePrivacy(model, *built.w));
      predicate_value = p.value;
    }
  } else {
    std::vector<AddNoiseMechanism> vs(args.n, *built.v);
    report = PrivacyMultiAddNoise(model, vs, options);
    if (args.n == 1 && model.has_predicate()) {
      RHO_ASSIGN_OR_RETURN(PrivacyReport p,
                           PredicatePrivacy(model, LiftToW(*built.v, model)));
      predicate_value = p.value;
    }
  }
  if (!report.ok()) {
    if (GetErrorCode(report.status()) == ErrorCode::kEnumerationTooLarge) {
      return absl::Status(report.status().code(),
                          absl::StrCat(report.status().message(),
                                       "; rerun with --simulate"));
    }
    return report.status();
  }
  Json j = Header("privacy", instance, args.rho, args.n,
                  {std::string(PrivacyMethodName(report->method))}, {});
  j["scheme"] = args.scheme;
  j["mode"] = "exact";
  j["value"] = report->value;
  j["success"] = report->success;
  j["predicate_value"] = Optional(predicate_value);
  j["bounds"] = BoundsJson(ComputeBounds(stats, args.n, args.rho));
  return DumpJson(j) + "\n";
}

// ---- curve --------------------------------------------------------------

struct CurveArgs {
  std::string grid = "0:1:0.01";
  int n = 1;
};

absl::StatusOr<std::string> RunCurve(const Common& common,
                                     const CurveArgs& args, std::istream& in) {
  if (args.n < 1) return Invalid(absl::StrCat("n must be >= 1, got ", args.n));
  RHO_ASSIGN_OR_RETURN(Grid grid, ParseGrid(args.grid));
  RHO_ASSIGN_OR_RETURN(Instance instance, LoadInstance(common, in));
  const SupportStats stats = ComputeSupportStats(instance.model);
  std::string csv = absl::StrCat("# ", std::string(kToolName), " ",
                                 std::string(ToolVersion()),
                                 " command=curve instance_digest=",
                                 instance.digest, " n=", args.n,
                                 " grid=", args.grid,
                                 " method=closed-form seeds=none\n");
  csv += "rho,privacy,converse_upper,universal_bound,universal_kind\n";
  for (double rho : grid.points) {
    std::string kind;
    double universal = 0.0;
    if (rho > 0.5) {
      RHO_ASSIGN_OR_RETURN(universal, AchievabilityLowerV1(stats, args.n, rho));
      kind = "v1_lower";
    } else {
      RHO_ASSIGN_OR_RETURN(universal, ClosedV2(stats, rho));
      kind = "v2_exact";
    }
    absl::StrAppend(&csv, FormatDouble(rho), ",",
                    FormatDouble(RhoPrivacyClosed(stats, rho)), ",",
                    FormatDouble(ConverseUpper(stats, args.n, rho)), ",",
                    FormatDouble(universal), ",", kind, "\n");
  }
  return csv;
}

// ---- compare ------------------------------------------------------------

struct CompareArgs {
  double rho = 0.0;
  int nmax = 6;
  uint64_t cap = 20'000'000;
};

absl::StatusOr<std::string> RunCompare(const Common& common,
                                       const CompareArgs& args,
                                       std::istream& in) {
  RHO_RETURN_IF_ERROR(CheckRho(args.rho));
  if (args.nmax < 1) {
    return Invalid(absl::StrCat("nmax must be >= 1, got ", args.nmax));
  }
  RHO_ASSIGN_OR_RETURN(Instance instance, LoadInstance(common, in));
  EnumerationOptions options;
  options.cap = args.cap;
  options.workers = common.workers;
  RHO_ASSIGN_OR_RETURN(SchemeComparison cmp,
                       CompareSchemes(instance.model, args.rho, args.nmax,
                                      options));
  Json j = Header("compare", instance, args.rho, args.nmax,
                  {"reduced-support", "chernoff"}, {});
  j["realm"] = std::string(cmp.realm);
  j["universal_scheme"] = std::string(cmp.universal_scheme);
  j["verdict"] = std::string(VerdictName(cmp.verdict));
  j["matrices_identical"] = cmp.matrices_identical;
  Json chernoff;
  chernoff["radius_universal"] = cmp.c_v1;
  chernoff["radius_vo"] = cmp.c_vo;
  chernoff["radius_universal_reduced"] = cmp.c_universal_reduced;
  chernoff["radius_vo_reduced"] = cmp.c_vo_reduced;
  chernoff["vo_reference_rate"] = cmp.vo_reference_rate;
  chernoff["limit_vo"] = cmp.limit_vo;
  chernoff["limit_universal"] = cmp.limit_universal;
  j["chernoff"] = chernoff;
  j["finite_n_disagrees"] = cmp.finite_n_disagrees;
  Json table = Json::array();
  for (const SchemeRow& row : cmp.table) {
    Json r;
    r["n"] = row.n;
    r["pi_vo"] = row.pi_vo;
    r["pi_universal"] = row.pi_universal;
    r["converse_upper"] = row.converse_upper;
    table.push_back(r);
  }
  j["table"] = table;
  return DumpJson(j) + "\n";
}

// ---- verify -------------------------------------------------------------

struct VerifyArgs {
  double rho = 0.0;
  double step = 0.05;
  int seeds = 20;
  int64_t trials = 20'000;
  uint64_t max_cells = 20'000'000;
  std::string mechanism;
};

class Checks {
 public:
  void Add(std::string name, bool pass, std::string detail) {
    Record(std::move(name), pass ? "pass" : "fail", std::move(detail));
    failed_ = failed_ || !pass;
  }
  void Skip(std::string name, std::string detail) {
    Record(std::move(name), "skipped", std::move(detail));
  }
  bool failed() const { return failed_; }
  const Json& json() const { return list_; }

 private:
  void Record(std::string name, const char* status, std::string detail) {
    Json c;
    c["name"] = std::move(name);
    c["status"] = status;
    c["detail"] = std::move(detail);
    list_.push_back(c);
  }
  Json list_ = Json::array();
  bool failed_ = false;
};

void GridCheck(Checks& checks, const std::string& name,
               const absl::StatusOr<SearchResult>& result) {
  if (!result.ok()) {
    if (GetErrorCode(result.status()) == ErrorCode::kSearchSpaceTooLarge) {
      checks.Skip(name, std::string(result.status().message()));
    } else {
      checks.Add(name, false, std::string(result.status().message()));
    }
    return;
  }
  checks.Add(name, result->dominated && result->constructed_within,
             absl::StrCat("grid best ", FormatDouble(result->best_value),
                          ", closed form ", FormatDouble(result->closed_form),
                          ", constructed ",
                          FormatDouble(result->constructed_value), ", slack ",
                          FormatDouble(result->slack), ", candidates ",
                          result->candidates));
}

absl::StatusOr<std::string> RunVerify(const Common& common,
                                      const VerifyArgs& args,
                                      std::istream& in, int& exit_code) {
  RHO_RETURN_IF_ERROR(CheckRho(args.rho));
  if (args.seeds < 1 || args.trials < 1) {
    return Invalid("seeds and trials must be >= 1");
  }
  RHO_ASSIGN_OR_RETURN(Instance instance, LoadInstance(common, in));
  const DataModel& model = instance.model;
  const double rho = args.rho;
  std::optional<Mechanism> supplied;
  if (!args.mechanism.empty()) {
    RHO_ASSIGN_OR_RETURN(std::string text, ReadSource(args.mechanism, in));
    RHO_ASSIGN_OR_RETURN(Mechanism w, ParseMechanism(text, model));
    supplied = std::move(w);
  }
  const SupportStats stats = ComputeSupportStats(model);
  const double closed = RhoPrivacyClosed(stats, rho);
  const Mechanism wo = BuildWo(model, stats, rho);
  Checks checks;

  {
    const double alt = RhoPrivacyClosedAlt(model, stats, rho);
    const double achieved = PrivacySingle(model, wo).value;
    const double level = RecoverabilityLevel(wo, model);
    checks.Add("optimal_value_forms",
               std::abs(closed - alt) <= 1e-12 &&
                   std::abs(achieved - closed) <= 1e-12 &&
                   level >= rho - 1e-12,
               absl::StrCat("closed ", FormatDouble(closed), ", alternative ",
                            FormatDouble(alt), ", constructed ",
                            FormatDouble(achieved), ", level ",
                            FormatDouble(level)));
  }

  SearchConfig config;
  config.grid_step = args.step;
  config.rho = rho;
  config.max_cells = args.max_cells;
  config.workers = common.workers;
  GridCheck(checks, "grid_optimality", SearchOptimalMechanism(model, config));

  if (model.has_predicate()) {
    auto closed_pred = PredicatePrivacyClosed(stats, rho);
    auto w_pred = BuildWoPredicate(model, stats, rho);
    if (closed_pred.ok() && w_pred.ok()) {
      auto achieved = PredicatePrivacy(model, *w_pred);
      checks.Add("predicate_value_forms",
                 achieved.ok() && std::abs(achieved->value - *closed_pred) <= 1e-12,
                 absl::StrCat("closed ", FormatDouble(*closed_pred),
                              ", constructed ",
                              achieved.ok() ? FormatDouble(achieved->value)
                                            : std::string("error")));
      GridCheck(checks, "predicate_grid_optimality",
                SearchOptimalPredicate(model, config));
    } else {
      const absl::Status& s =
          closed_pred.ok() ? w_pred.status() : closed_pred.status();
      checks.Add("predicate_value_forms", false, std::string(s.message()));
    }
  } else {
    checks.Skip("predicate_value_forms", "instance has no predicate");
  }

  {
    std::mt19937_64 rng(0);
    int tuples = 0;
    bool ok = true;
    std::string worst;
    double worst_gap = -kInfinity;
    for (int t = 0; t < 60; ++t) {
      const int n = 1 + t % 3;
      std::vector<Mechanism> ws;
      for (int s = 0; s < n; ++s) ws.push_back(RandomFeasibleMechanism(model, rho, rng));
      auto privacy = PrivacyMulti(model, ws);
      if (!privacy.ok()) continue;
      ++tuples;
      const double gap = privacy->value - ConverseUpper(stats, n, rho);
      if (gap > worst_gap) worst_gap = gap;
      ok = ok && gap <= 1e-10;
    }
    for (int n = 1; n <= 4; ++n) {
      std::vector<Mechanism> ws(n, wo);
      auto privacy = PrivacyMulti(model, ws);
      if (!privacy.ok()) break;
      ++tuples;
      const double gap = privacy->value - ConverseUpper(stats, n, rho);
      if (gap > worst_gap) worst_gap = gap;
      ok = ok && gap <= 1e-10;
    }
    checks.Add("converse_dominance", ok && tuples > 0,
               absl::StrCat(tuples, " tuples, largest excess over bound ",
                            FormatDouble(worst_gap)));
  }

  {
    std::mt19937_64 rng(1);
    int configs = 0;
    bool ok = true;
    for (int t = 0; t < 60; ++t) {
      const int n = 1 + t % 4;
      std::vector<Mechanism> ws;
      for (int s = 0; s < n; ++s) ws.push_back(RandomFeasibleMechanism(model, rho, rng));
      auto success = FunctionRecoveryProbability(model, ws);
      if (!success.ok()) continue;
      ++configs;
      ok = ok && *success >= FunctionRecoveryLowerBound(stats, n, rho) - 1e-12;
    }
    checks.Add("function_recovery_bound", ok && configs > 0,
               absl::StrCat(configs, " configurations"));
  }

  if (rho > 0.5) {
    bool ok = true;
    std::string detail;
    const AddNoiseMechanism v1 = BuildV1ForModel(model, rho);
    for (int n = 1; n <= 6; ++n) {
      std::vector<AddNoiseMechanism> vs(n, v1);
      auto privacy = PrivacyMultiAddNoise(model, vs);
      auto lower = AchievabilityLowerV1(stats, n, rho);
      if (!privacy.ok() || !lower.ok()) {
        ok = false;
        break;
      }
      const double upper = ConverseUpper(stats, n, rho);
      ok = ok && privacy->value >= *lower - 1e-10 &&
           privacy->value <= upper + 1e-10;
      absl::StrAppend(&detail, n == 1 ? "" : "; ", "n=", n, ": ",
                      FormatDouble(*lower), " <= ",
                      FormatDouble(privacy->value), " <= ",
                      FormatDouble(upper));
    }
    checks.Add("v1_sandwich", ok, detail);
  } else {
    bool ok = true;
    auto v2 = BuildV2ForModel(model, rho);
    auto target = ClosedV2(stats, rho);
    if (!v2.ok() || !target.ok()) {
      ok = false;
    } else {
      for (int n = 1; n <= 5; ++n) {
        std::vector<AddNoiseMechanism> vs(n, *v2);
        auto privacy = PrivacyMultiAddNoise(model, vs);
        ok = ok && privacy.ok() && std::abs(privacy->value - *target) <= 1e-10;
      }
    }
    checks.Add("v2_exactness", ok,
               target.ok() ? absl::StrCat("closed form ", FormatDouble(*target))
                           : std::string(target.status().message()));
  }

  {
    std::vector<Mechanism> ws = {wo};
    auto check = RationalCrossCheck(model, ws);
    if (check.ok()) {
      checks.Add("rational_agreement", check->agree,
                 absl::StrCat("exact ", check->exact.str(), ", float ",
                              FormatDouble(check->float_value)));
    } else if (GetErrorCode(check.status()) == ErrorCode::kNotRational) {
      checks.Skip("rational_agreement", std::string(check.status().message()));
    } else {
      checks.Add("rational_agreement", false,
                 std::string(check.status().message()));
    }
  }

  std::vector<uint64_t> seeds;
  {
    std::vector<Mechanism> ws = {wo};
    int within = 0;
    for (int s = 0; s < args.seeds; ++s) {
      seeds.push_back(static_cast<uint64_t>(s));
      auto sim = SimulateProtocol(model, ws, args.trials, s, common.workers);
      if (sim.ok() && WithinSigma(*sim, closed)) ++within;
    }
    const int needed = static_cast<int>(std::ceil(0.95 * args.seeds));
    checks.Add("simulation_consistency", within >= needed,
               absl::StrCat(within, " of ", args.seeds, " seeds within 4 sigma (",
                            args.trials, " trials each, need ", needed, ")"));
  }

  if (supplied.has_value()) {
    const double level = RecoverabilityLevel(*supplied, model);
    const double value = PrivacySingle(model, *supplied).value;
    checks.Add("supplied_mechanism",
               level >= rho - 1e-12 && value <= closed + 1e-12,
               absl::StrCat("level ", FormatDouble(level), ", privacy ",
                            FormatDouble(value), ", optimum ",
                            FormatDouble(closed)));
  }

  Json j = Header("verify", instance, rho, 1,
                  {"grid-search", "enumeration", "rational", "monte-carlo"},
                  seeds);
  j["rng"] = std::string(kRngAlgorithm);
  j["grid_step"] = args.step;
  j["trials"] = args.trials;
  j["passed"] = !checks.failed();
  j["checks"] = checks.json();
  exit_code = checks.failed() ? kExitInvariant : kExitOk;
  return DumpJson(j) + "\n";
}

void AddCommon(CLI::App* sub, Common& common) {
  sub->add_option("--in", common.in, "Instance JSON file, or - for stdin");
  sub->add_option("--out", common.out, "Output file (default stdout)");
  sub->add_option("--workers", common.workers,
                  "Worker threads (default $RHO_PRIV_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
}

int Report(const absl::Status& status, std::ostream& err) {
  err << kToolName << ": " << status.message() << "\n";
  return ExitCodeFor(status);
}

}  // namespace

std::string_view ToolVersion() { return RHO_PRIV_VERSION; }

int ExitCodeFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return kExitOk;
    case absl::StatusCode::kInvalidArgument:
      return kExitValidation;
    case absl::StatusCode::kOutOfRange:
    case absl::StatusCode::kFailedPrecondition:
      return kExitRealm;
    case absl::StatusCode::kResourceExhausted:
      return kExitSize;
    default:
      return 1;
  }
}

std::string FormatDouble(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string DumpJson(const Json& value) {
  std::string out;
  DumpTo(value, 0, out);
  return out;
}

uint64_t Fnv1a64(std::string_view bytes) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

absl::StatusOr<Instance> ParseInstance(std::string_view text) {
  RHO_ASSIGN_OR_RETURN(Json j, ParseJson(text));
  if (!j.is_object()) return Invalid("instance must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "px" && it.key() != "f" && it.key() != "h" &&
        it.key() != "labels") {
      return Invalid(absl::StrCat("unknown instance field \"", it.key(), "\""));
    }
  }
  if (!j.contains("px") || !j["px"].is_array() || j["px"].empty()) {
    return Invalid("instance needs a non-empty \"px\" array");
  }
  std::vector<double> px;
  for (const Json& v : j["px"]) {
    if (!v.is_number()) return Invalid("\"px\" entries must be numbers");
    px.push_back(v.get<double>());
  }
  auto read_labels = [&](const char* key) -> absl::StatusOr<std::vector<int>> {
    if (!j[key].is_array()) {
      return Invalid(absl::StrCat("\"", key, "\" must be an array"));
    }
    std::vector<int> out;
    for (const Json& v : j[key]) {
      if (!v.is_number_integer()) {
        return Invalid(absl::StrCat("\"", key, "\" entries must be integers"));
      }
      out.push_back(v.get<int>());
    }
    return out;
  };
  if (!j.contains("f")) return Invalid("instance needs an \"f\" array");
  RHO_ASSIGN_OR_RETURN(std::vector<int> f, read_labels("f"));
  std::optional<std::vector<int>> h;
  if (j.contains("h")) {
    RHO_ASSIGN_OR_RETURN(std::vector<int> values, read_labels("h"));
    h = std::move(values);
  }
  std::vector<std::string> labels;
  if (j.contains("labels")) {
    if (!j["labels"].is_array()) return Invalid("\"labels\" must be an array");
    for (const Json& v : j["labels"]) {
      if (!v.is_string()) return Invalid("\"labels\" entries must be strings");
      labels.push_back(v.get<std::string>());
    }
    if (labels.size() != px.size()) {
      return MakeError(ErrorCode::kShapeMismatch,
                       absl::StrCat(labels.size(), " labels for ", px.size(),
                                    " data symbols"));
    }
  } else {
    for (size_t x = 0; x < px.size(); ++x) labels.push_back(std::to_string(x));
  }
  std::string canonical = "px:";
  for (size_t x = 0; x < px.size(); ++x) {
    absl::StrAppend(&canonical, x ? "," : "", FormatDouble(px[x]));
  }
  canonical += ";f:";
  for (size_t x = 0; x < f.size(); ++x) absl::StrAppend(&canonical, x ? "," : "", f[x]);
  canonical += ";h:";
  if (h.has_value()) {
    for (size_t x = 0; x < h->size(); ++x) {
      absl::StrAppend(&canonical, x ? "," : "", (*h)[x]);
    }
  } else {
    canonical += "-";
  }
  RHO_ASSIGN_OR_RETURN(DataModel model,
                       DataModel::Create(std::move(px), std::move(f), 0, h));
  char digest[32];
  std::snprintf(digest, sizeof(digest), "fnv1a64:%016llx",
                static_cast<unsigned long long>(Fnv1a64(canonical)));
  return Instance{std::move(model), std::move(labels), digest};
}

absl::StatusOr<Grid> ParseGrid(std::string_view grid_spec) {
  const std::string spec(grid_spec);
  std::vector<std::string> parts = absl::StrSplit(spec, ':');
  double v[3];
  if (parts.size() != 3) {
    return Invalid(absl::StrCat("grid \"", spec, "\" is not start:stop:step"));
  }
  for (int i = 0; i < 3; ++i) {
    if (!absl::SimpleAtod(parts[i], &v[i]) || !std::isfinite(v[i])) {
      return Invalid(absl::StrCat("grid \"", spec, "\" has a bad number"));
    }
  }
  const double start = v[0], stop = v[1], step = v[2];
  if (!(start >= 0.0 && start <= stop && stop <= 1.0 && step > 0.0)) {
    return Invalid(absl::StrCat("grid \"", spec,
                                "\" needs 0 <= start <= stop <= 1, step > 0"));
  }
  const double span = (stop - start) / step;
  if (span > 1e6) return Invalid(absl::StrCat("grid \"", spec, "\" is too fine"));
  const long count = static_cast<long>(std::floor(span + 1e-9));
  auto round12 = [](double x) { return std::round(x * 1e12) / 1e12; };
  Grid grid;
  for (long i = 0; i <= count; ++i) {
    grid.points.push_back(std::min(stop, round12(start + i * step)));
  }
  if (grid.points.back() < stop - 1e-12) grid.points.push_back(round12(stop));
  return grid;
}

absl::StatusOr<Mechanism> ParseMechanism(std::string_view text,
                                         const DataModel& model) {
  RHO_ASSIGN_OR_RETURN(Json j, ParseJson(text));
  if (!j.is_object() || !j.contains("matrix") || !j["matrix"].is_array()) {
    return Invalid("mechanism file needs a \"matrix\" array");
  }
  Matrix rows;
  for (const Json& row : j["matrix"]) {
    if (!row.is_array()) return Invalid("matrix rows must be arrays");
    std::vector<double> entries;
    for (const Json& v : row) {
      if (!v.is_number()) return Invalid("matrix entries must be numbers");
      entries.push_back(v.get<double>());
    }
    rows.push_back(std::move(entries));
  }
  std::string kind;
  if (j.contains("kind")) {
    if (!j["kind"].is_string()) return Invalid("\"kind\" must be a string");
    kind = j["kind"].get<std::string>();
    if (kind != "channel" && kind != "add-noise") {
      return Invalid(absl::StrCat("unknown mechanism kind \"", kind, "\""));
    }
  } else if (static_cast<int>(rows.size()) == model.k() &&
             model.k() != model.r()) {
    kind = "add-noise";
  }
  if (kind == "add-noise") {
    RHO_ASSIGN_OR_RETURN(AddNoiseMechanism v,
                         AddNoiseMechanism::Create(std::move(rows)));
    if (v.k() != model.k()) {
      return MakeError(ErrorCode::kShapeMismatch,
                       absl::StrCat("add-noise matrix is ", v.k(), "x", v.k(),
                                    ", instance has k=", model.k()));
    }
    return LiftToW(v, model);
  }
  return Mechanism::CreateFor(model, std::move(rows));
}

int DefaultWorkers() {
  const char* env = std::getenv("RHO_PRIV_WORKERS");
  int workers = 1;
  if (env != nullptr && absl::SimpleAtoi(env, &workers) && workers >= 1) {
    return workers;
  }
  return 1;
}

int Run(const std::vector<std::string>& args, std::istream& in,
        std::ostream& out, std::ostream& err) {
  CLI::App app{"Recoverability-constrained privacy mechanisms: construction, "
               "exact privacy, bounds and verification.",
               std::string(kToolName)};
  app.set_version_flag("--version", std::string(ToolVersion()));
  app.require_subcommand(1);

  Common common;
  common.workers = DefaultWorkers();
  const std::vector<std::string> schemes = SchemeKeys();

  MechanismArgs mech;
  CLI::App* mech_cmd = app.add_subcommand("mechanism", "Build a mechanism");
  AddCommon(mech_cmd, common);
  mech_cmd->add_option("--rho", mech.rho, "Recoverability level")->required();
  mech_cmd->add_option("--scheme", mech.scheme, "Construction")
      ->check(CLI::IsMember(schemes));

  PrivacyArgs priv;
  CLI::App* priv_cmd = app.add_subcommand("privacy", "Privacy of n responses");
  AddCommon(priv_cmd, common);
  priv_cmd->add_option("--rho", priv.rho, "Recoverability level")->required();
  priv_cmd->add_option("--scheme", priv.scheme, "Construction")
      ->check(CLI::IsMember(schemes));
  priv_cmd->add_option("--n", priv.n, "Number of responses");
  CLI::Option* exact_flag = priv_cmd->add_flag("--exact", priv.exact,
                                               "Exact enumeration (default)");
  CLI::Option* sim_flag =
      priv_cmd->add_flag("--simulate", priv.simulate, "Monte-Carlo estimate");
  exact_flag->excludes(sim_flag);
  priv_cmd->add_option("--trials", priv.trials, "Simulation trials");
  priv_cmd->add_option("--seed", priv.seed, "Simulation seed");
  priv_cmd->add_option("--cap", priv.cap, "Enumeration cap");

  CurveArgs curve;
  CLI::App* curve_cmd = app.add_subcommand("curve", "Privacy against rho (CSV)");
  AddCommon(curve_cmd, common);
  curve_cmd->add_option("--grid", curve.grid, "start:stop:step");
  curve_cmd->add_option("--n", curve.n, "Number of responses for the bounds");

  CompareArgs cmp;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "V_o against V_1 / V_2");
  AddCommon(cmp_cmd, common);
  cmp_cmd->add_option("--rho", cmp.rho, "Recoverability level")->required();
  cmp_cmd->add_option("--nmax", cmp.nmax, "Largest n in the table");
  cmp_cmd->add_option("--cap", cmp.cap, "Enumeration cap");

  VerifyArgs ver;
  CLI::App* ver_cmd = app.add_subcommand("verify", "Run the oracle suites");
  AddCommon(ver_cmd, common);
  ver_cmd->add_option("--rho", ver.rho, "Recoverability level")->required();
  ver_cmd->add_option("--step", ver.step, "Grid step of the search");
  ver_cmd->add_option("--seeds", ver.seeds, "Simulation seeds");
  ver_cmd->add_option("--trials", ver.trials, "Trials per seed");
  ver_cmd->add_option("--max-cells", ver.max_cells, "Grid search cap");
  ver_cmd->add_option("--mechanism", ver.mechanism,
                      "Mechanism JSON to check against the optimum");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << ToolVersion() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << kToolName << ": " << e.what() << "\n";
    return kExitValidation;
  }

  absl::StatusOr<std::string> text;
  int exit_code = kExitOk;
  if (mech_cmd->parsed()) {
    text = RunMechanism(common, mech, in);
  } else if (priv_cmd->parsed()) {
    text = RunPrivacy(common, priv, in);
  } else if (curve_cmd->parsed()) {
    text = RunCurve(common, curve, in);
  } else if (cmp_cmd->parsed()) {
    text = RunCompare(common, cmp, in);
  } else {
    text = RunVerify(common, ver, in, exit_code);
  }
  if (!text.ok()) return Report(text.status(), err);
  absl::Status written = Emit(common, *text, out);
  if (!written.ok()) return Report(written, err);
  return exit_code;
}

}  // namespace rho_privacy::cli
