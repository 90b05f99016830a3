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

#ifndef RHO_PRIVACY_STATUS_MACROS_H_
#define RHO_PRIVACY_STATUS_MACROS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define RHO_PRIVACY_CONCAT_INNER_(a, b) a##b
#define RHO_PRIVACY_CONCAT_(a, b) RHO_PRIVACY_CONCAT_INNER_(a, b)

#define RHO_RETURN_IF_ERROR(expr)                 \
  do {                                            \
    const ::absl::Status rho_status_ = (expr);    \
    if (!rho_status_.ok()) return rho_status_;    \
  } while (false)

#define RHO_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, expr) \
  auto tmp = (expr);                               \
  if (!tmp.ok()) return tmp.status();              \
  lhs = std::move(*tmp)

#define RHO_ASSIGN_OR_RETURN(lhs, expr) \
  RHO_ASSIGN_OR_RETURN_IMPL_(           \
      RHO_PRIVACY_CONCAT_(rho_statusor_, __LINE__), lhs, expr)

#endif  // RHO_PRIVACY_STATUS_MACROS_H_
