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

#ifndef RHO_PRIVACY_CLI_H_
#define RHO_PRIVACY_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"
#include "rho_privacy/mechanisms.h"
#include "rho_privacy/model.h"

namespace rho_privacy::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRealm = 3;
inline constexpr int kExitSize = 4;
inline constexpr int kExitInvariant = 5;

std::string_view ToolVersion();

// Maps a library status to the exit-code contract.
int ExitCodeFor(const absl::Status& status);

// %.17g; non-finite values become "inf", "-inf" or "nan".
std::string FormatDouble(double value);

// Serializes with two-space indentation, keys in insertion order and every
// floating-point number through FormatDouble. Non-finite numbers are
// written as the strings above.
std::string DumpJson(const Json& value);

uint64_t Fnv1a64(std::string_view bytes);

struct Instance {
  DataModel model;
  std::vector<std::string> labels;
  // "fnv1a64:" followed by 16 hex digits over a canonical rendering.
  std::string digest;
};

// {"px": [...], "f": [...], "h": [...]?, "labels": [...]?}.
absl::StatusOr<Instance> ParseInstance(std::string_view text);

struct Grid {
  std::vector<double> points;
};

// "start:stop:step" with 0 <= start <= stop <= 1 and step > 0. Both
// endpoints are included; points are rounded to 12 decimals.
absl::StatusOr<Grid> ParseGrid(std::string_view spec);

// {"matrix": [[...]]}, optionally with "kind": "channel" | "add-noise".
// An add-noise matrix is lifted to the data alphabet.
absl::StatusOr<Mechanism> ParseMechanism(std::string_view text,
                                         const DataModel& model);

// Workers from RHO_PRIV_WORKERS, else 1.
int DefaultWorkers();

// Entry point shared by the binary and the tests. args[0] is the program
// name.
int Run(const std::vector<std::string>& args, std::istream& in,
        std::ostream& out, std::ostream& err);

}  // namespace rho_privacy::cli

#endif  // RHO_PRIVACY_CLI_H_
