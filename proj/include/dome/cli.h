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

#ifndef DOME_CLI_H_
#define DOME_CLI_H_

namespace dome {

inline constexpr int kExitPass = 0;
inline constexpr int kExitToleranceFailure = 1;
inline constexpr int kExitConfigError = 2;

// Subcommands: train, check-lemma1, check-lemma2, check-secagg,
// check-sketch, report. Flags: --config <path>, --seed <u64>, --out <dir>.
int RunCli(int argc, char** argv);

}  // namespace dome

#endif  // DOME_CLI_H_
