// Copyright 2026 The DOME Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DOME_STATUS_MACROS_H_
#define DOME_STATUS_MACROS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define DOME_CONCAT_INNER_(a, b) a##b
#define DOME_CONCAT_(a, b) DOME_CONCAT_INNER_(a, b)

#define DOME_RETURN_IF_ERROR(expr)              \
  do {                                          \
    const absl::Status dome_status_ = (expr);   \
    if (!dome_status_.ok()) return dome_status_; \
  } while (0)

#define DOME_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, rexpr) \
  auto tmp = (rexpr);                                \
  if (!tmp.ok()) return tmp.status();                \
  lhs = std::move(tmp).value()

// Evaluates `rexpr` (a StatusOr) and either assigns its value to `lhs` or
// returns the error from the enclosing function.
#define DOME_ASSIGN_OR_RETURN(lhs, rexpr) \
  DOME_ASSIGN_OR_RETURN_IMPL_(DOME_CONCAT_(dome_statusor_, __LINE__), lhs, rexpr)

#endif  // DOME_STATUS_MACROS_H_
