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

#include "dome/serialization.h"

#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <utility>

#include "absl/strings/str_cat.h"
#include "dome/binary_io.h"
#include "dome/status_macros.h"

namespace dome {
namespace {

constexpr uint64_t kCheckpointMagic = 0x31504B43454D4F44ULL;  // "DOMECKP1"
constexpr uint64_t kTaskMagic = 0x314B534154454D4FULL;
constexpr uint64_t kMaxDim = uint64_t{1} << 31;

absl::Status Truncated(const char* what) {
  return absl::DataLossError(absl::StrCat("truncated input while reading ", what));
}

absl::StatusOr<uint64_t> GetU64(std::string_view& in, const char* what) {
  uint64_t v = 0;
  if (!ReadU64(in, v)) return Truncated(what);
  return v;
}

absl::StatusOr<double> GetF64(std::string_view& in, const char* what) {
  double v = 0.0;
  if (!ReadF64(in, v)) return Truncated(what);
  return v;
}

absl::StatusOr<int> GetDim(std::string_view& in, const char* what) {
  DOME_ASSIGN_OR_RETURN(uint64_t v, GetU64(in, what));
  if (v >= kMaxDim) {
    return absl::DataLossError(absl::StrCat("implausible ", what, ": ", v));
  }
  return static_cast<int>(v);
}

}  // namespace

void AppendMatrix(std::string& out, const Matrix& m) {
  AppendU64(out, static_cast<uint64_t>(m.rows()));
  AppendU64(out, static_cast<uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) AppendF64(out, m(i, j));
  }
}

absl::StatusOr<Matrix> ReadMatrix(std::string_view& in) {
  DOME_ASSIGN_OR_RETURN(int rows, GetDim(in, "matrix rows"));
  DOME_ASSIGN_OR_RETURN(int cols, GetDim(in, "matrix cols"));
  if (in.size() / 8 < static_cast<size_t>(rows) * static_cast<size_t>(cols)) {
    return Truncated("matrix entries");
  }
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) ReadF64(in, m(i, j));
  }
  return m;
}

void AppendVector(std::string& out, const Vector& v) {
  AppendU64(out, static_cast<uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) AppendF64(out, v(i));
}

absl::StatusOr<Vector> ReadVector(std::string_view& in) {
  DOME_ASSIGN_OR_RETURN(int n, GetDim(in, "vector length"));
  if (in.size() / 8 < static_cast<size_t>(n)) return Truncated("vector entries");
  Vector v(n);
  for (int i = 0; i < n; ++i) ReadF64(in, v(i));
  return v;
}

void AppendSketch(std::string& out, const SketchState& state) {
  AppendU64(out, static_cast<uint64_t>(state.d));
  AppendU64(out, static_cast<uint64_t>(state.k));
  AppendU64(out, static_cast<uint64_t>(state.t));
  AppendU64(out, static_cast<uint64_t>(state.retained));
  AppendF64(out, state.q);
  AppendMatrix(out, state.s);
  AppendMatrix(out, state.u);
  AppendVector(out, state.lambda);
}

absl::StatusOr<SketchState> ReadSketch(std::string_view& in) {
  SketchState s;
  DOME_ASSIGN_OR_RETURN(s.d, GetDim(in, "sketch d"));
  DOME_ASSIGN_OR_RETURN(s.k, GetDim(in, "sketch k"));
  DOME_ASSIGN_OR_RETURN(uint64_t t, GetU64(in, "sketch t"));
  s.t = static_cast<int64_t>(t);
  DOME_ASSIGN_OR_RETURN(s.retained, GetDim(in, "sketch retained"));
  DOME_ASSIGN_OR_RETURN(s.q, GetF64(in, "sketch q"));
  DOME_ASSIGN_OR_RETURN(s.s, ReadMatrix(in));
  DOME_ASSIGN_OR_RETURN(s.u, ReadMatrix(in));
  DOME_ASSIGN_OR_RETURN(s.lambda, ReadVector(in));
  if (s.s.rows() != s.d || s.s.cols() != s.k || s.u.rows() != s.d ||
      s.u.cols() != s.k || s.lambda.size() != s.k || s.retained > s.k) {
    return absl::DataLossError("sketch block has inconsistent dimensions");
  }
  return s;
}

void AppendAdam(std::string& out, const AdamState& state) {
  AppendU64(out, static_cast<uint64_t>(state.step));
  AppendF64(out, state.beta1);
  AppendF64(out, state.beta2);
  AppendF64(out, state.eta);
  AppendF64(out, state.gamma_floor);
  AppendVector(out, state.m_raw);
  AppendVector(out, state.v_raw);
  AppendVector(out, state.m_hat);
  AppendVector(out, state.v_hat);
}

absl::StatusOr<AdamState> ReadAdam(std::string_view& in) {
  AdamState a;
  DOME_ASSIGN_OR_RETURN(uint64_t step, GetU64(in, "adam step"));
  a.step = static_cast<int64_t>(step);
  DOME_ASSIGN_OR_RETURN(a.beta1, GetF64(in, "adam beta1"));
  DOME_ASSIGN_OR_RETURN(a.beta2, GetF64(in, "adam beta2"));
  DOME_ASSIGN_OR_RETURN(a.eta, GetF64(in, "adam eta"));
  DOME_ASSIGN_OR_RETURN(a.gamma_floor, GetF64(in, "adam gamma_floor"));
  DOME_ASSIGN_OR_RETURN(a.m_raw, ReadVector(in));
  DOME_ASSIGN_OR_RETURN(a.v_raw, ReadVector(in));
  DOME_ASSIGN_OR_RETURN(a.m_hat, ReadVector(in));
  DOME_ASSIGN_OR_RETURN(a.v_hat, ReadVector(in));
  const auto d = a.m_raw.size();
  if (a.v_raw.size() != d || a.m_hat.size() != d || a.v_hat.size() != d) {
    return absl::DataLossError("adam block has inconsistent dimensions");
  }
  return a;
}

std::string SerializeCheckpoint(const RunCheckpoint& checkpoint) {
  std::string out;
  AppendU64(out, kCheckpointMagic);
  AppendU64(out, static_cast<uint64_t>(checkpoint.round));
  AppendU64(out, static_cast<uint64_t>(checkpoint.epoch));
  AppendVector(out, checkpoint.theta);
  AppendSketch(out, checkpoint.sketch);
  AppendAdam(out, checkpoint.adam);
  return out;
}

absl::StatusOr<RunCheckpoint> ParseCheckpoint(std::string_view bytes) {
  DOME_ASSIGN_OR_RETURN(uint64_t magic, GetU64(bytes, "checkpoint magic"));
  if (magic != kCheckpointMagic) {
    return absl::DataLossError("not a checkpoint file");
  }
  RunCheckpoint c;
  DOME_ASSIGN_OR_RETURN(uint64_t round, GetU64(bytes, "checkpoint round"));
  DOME_ASSIGN_OR_RETURN(uint64_t epoch, GetU64(bytes, "checkpoint epoch"));
  c.round = static_cast<int64_t>(round);
  c.epoch = static_cast<int64_t>(epoch);
  DOME_ASSIGN_OR_RETURN(c.theta, ReadVector(bytes));
  DOME_ASSIGN_OR_RETURN(c.sketch, ReadSketch(bytes));
  DOME_ASSIGN_OR_RETURN(c.adam, ReadAdam(bytes));
  if (!bytes.empty()) {
    return absl::DataLossError(
        absl::StrCat(bytes.size(), " trailing bytes after checkpoint"));
  }
  if (c.theta.size() != c.sketch.d || c.adam.m_raw.size() != c.sketch.d) {
    return absl::DataLossError("checkpoint blocks disagree on d");
  }
  return c;
}

std::string SerializeTask(const Task& task) {
  std::string out;
  AppendU64(out, kTaskMagic);
  AppendU64(out, static_cast<uint64_t>(task.index()));
  const auto& examples = Examples(task);
  if (const auto* t = std::get_if<LowRankRegressionTask>(&task)) {
    AppendF64(out, t->label_noise);
    AppendMatrix(out, t->p_star);
    AppendVector(out, t->theta_star);
  } else {
    const auto& l = std::get<LogisticTask>(task);
    AppendF64(out, l.off_subspace_noise);
    AppendMatrix(out, l.p_star);
    AppendVector(out, l.theta_star);
  }
  AppendU64(out, examples.size());
  for (const Example& e : examples) {
    AppendVector(out, e.x);
    AppendF64(out, e.y);
  }
  return out;
}

absl::StatusOr<Task> ParseTask(std::string_view bytes) {
  DOME_ASSIGN_OR_RETURN(uint64_t magic, GetU64(bytes, "task magic"));
  if (magic != kTaskMagic) return absl::DataLossError("not a task file");
  DOME_ASSIGN_OR_RETURN(uint64_t kind, GetU64(bytes, "task kind"));
  if (kind > 1) {
    return absl::DataLossError(absl::StrCat("unknown task kind tag ", kind));
  }
  DOME_ASSIGN_OR_RETURN(double param, GetF64(bytes, "task parameter"));
  DOME_ASSIGN_OR_RETURN(Matrix p_star, ReadMatrix(bytes));
  DOME_ASSIGN_OR_RETURN(Vector theta_star, ReadVector(bytes));
  DOME_ASSIGN_OR_RETURN(int n, GetDim(bytes, "example count"));
  std::vector<Example> examples(n);
  for (Example& e : examples) {
    DOME_ASSIGN_OR_RETURN(e.x, ReadVector(bytes));
    DOME_ASSIGN_OR_RETURN(e.y, GetF64(bytes, "example label"));
    if (e.x.size() != p_star.rows()) {
      return absl::DataLossError("example dimension disagrees with P*");
    }
  }
  if (!bytes.empty()) return absl::DataLossError("trailing bytes after task");
  if (kind == 0) {
    LowRankRegressionTask t;
    t.label_noise = param;
    t.p_star = std::move(p_star);
    t.theta_star = std::move(theta_star);
    t.examples = std::move(examples);
    return Task(std::move(t));
  }
  LogisticTask t;
  t.off_subspace_noise = param;
  t.p_star = std::move(p_star);
  t.theta_star = std::move(theta_star);
  t.examples = std::move(examples);
  return Task(std::move(t));
}

absl::Status WriteFile(const std::string& path, std::string_view contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) return absl::UnavailableError(absl::StrCat("cannot open ", path));
  f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!f) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return std::string(std::istreambuf_iterator<char>(f), {});
}

}  // namespace dome
