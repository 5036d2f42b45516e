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

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>

#include "hsurf/mesh.hpp"
#include "hsurf/solver.hpp"

namespace hsurf {

// INI-style run description; expression values may be double-quoted.
//
//   [domain]    g, u, a, b, R
//   [data]      H, psi, gamma
//   [mesh]      n, m, diagonal = shorter | uniform, file (optional mesh file)
//   [solver]    tol, max_iter, guess = harmonic | zero
//   [stability] tol_stab, fd_directions, seed
//   [output]    dir
struct PipelineConfig {
  std::string g, u, H, psi, gamma;
  double a = 0.0, b = 0.0, R = 0.0;
  int n = 0, m = 0;
  DiagonalRule diagonal = DiagonalRule::Shorter;
  std::string mesh_file;
  double tol = 1e-10;
  int max_iter = 25;
  InitialGuess guess = InitialGuess::Harmonic;
  double tol_stab = 1e-6;
  int fd_directions = 5;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::filesystem::path base_dir;  // relative paths resolve against this
};

// Throws ConfigError naming the offending key.
PipelineConfig parse_config(std::istream& is, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace hsurf
