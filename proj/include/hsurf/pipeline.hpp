// Copyright 2026 The hsurf Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "hsurf/admissible.hpp"
#include "hsurf/config.hpp"
#include "hsurf/solver.hpp"
#include "hsurf/stability.hpp"

namespace hsurf {

enum class Mode { Gate, Solve, Full };
const char* mode_name(Mode m);

enum ExitCode : int {
  kExitPass = 0,
  kExitUsage = 1,
  kExitGate = 2,
  kExitSolver = 3,
  kExitUnstable = 4,
};

struct RunOptions {
  Mode mode = Mode::Full;
  bool force = false;     // run past failed gates; the verdict still fails
  int refine = 0;         // doubles n and m this many times
  std::string out_dir;    // overrides the config when non-empty
  std::string timestamp;  // defaults to the current UTC time
};

struct Diagnostics {
  double contact_max = 0.0;
  double normal_max = 0.0;
  double n3_max = 0.0;
  bool n3_reversed = false;
  bool n3_available = false;
};

struct RunReport {
  Mode mode = Mode::Full;
  std::string timestamp;
  int n = 0, m = 0;
  std::size_t nodes = 0;
  double h_max = 0.0;
  GateReport gates;
  bool gates_pass = false;
  bool forced = false;
  std::optional<Solution> solution;
  std::optional<FunctionalValues> functionals;
  std::optional<Diagnostics> diagnostics;
  std::optional<StabilityReport> stability;
  std::optional<FdHessianCheck> fd_interior, fd_trace;
  std::string error_stage, error_message;
  std::string verdict = "FAIL";
  int exit_code = kExitUsage;
  std::vector<std::string> warnings;
  std::string out_dir;
  std::vector<std::string> files;

  // Prefix-namespaced key=value lines, in a fixed order.
  std::vector<std::pair<std::string, std::string>> machine() const;
};

// Runs parse -> geometry -> gates -> mesh -> solve -> lift -> diagnostics ->
// stability. Stage failures are captured in the report, never thrown.
RunReport run_pipeline(const PipelineConfig& config, const RunOptions& options);

// Human-readable summary followed by the machine block between
// "--- machine ---" and "--- end ---".
void write_report(std::ostream& os, const RunReport& report);

}  // namespace hsurf
