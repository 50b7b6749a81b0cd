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

// Binary checkpoint formats. All integers are u64 and all reals f64, little
// endian; matrices are stored row-major after their dimensions.

#ifndef DOME_SERIALIZATION_H_
#define DOME_SERIALIZATION_H_

#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dome/linalg.h"
#include "dome/optimizer.h"
#include "dome/sketch.h"
#include "dome/tasks.h"

namespace dome {

void AppendMatrix(std::string& out, const Matrix& m);
absl::StatusOr<Matrix> ReadMatrix(std::string_view& in);
void AppendVector(std::string& out, const Vector& v);
absl::StatusOr<Vector> ReadVector(std::string_view& in);

// d, k, t, retained, q, then S, U (row-major) and lambda.
void AppendSketch(std::string& out, const SketchState& state);
absl::StatusOr<SketchState> ReadSketch(std::string_view& in);

void AppendAdam(std::string& out, const AdamState& state);
absl::StatusOr<AdamState> ReadAdam(std::string_view& in);

struct RunCheckpoint {
  int64_t round = 0;
  int64_t epoch = 0;
  Vector theta;
  SketchState sketch;
  AdamState adam;
};

std::string SerializeCheckpoint(const RunCheckpoint& checkpoint);
absl::StatusOr<RunCheckpoint> ParseCheckpoint(std::string_view bytes);

// Task dump: kind tag, then generation parameters and every example.
std::string SerializeTask(const Task& task);
absl::StatusOr<Task> ParseTask(std::string_view bytes);

absl::Status WriteFile(const std::string& path, std::string_view contents);
absl::StatusOr<std::string> ReadFile(const std::string& path);

}  // namespace dome

#endif  // DOME_SERIALIZATION_H_
