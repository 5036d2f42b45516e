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

#include <cstdlib>
#include <string>

#include "hsurf/kernels.hpp"

namespace hsurf::kernels {
namespace {

const KernelTable& select() {
  const char* env = std::getenv("HSURF_SIMD");
  const std::string pref = env ? env : "auto";
  if (pref == "scalar") return scalar_table();
  const KernelTable* avx2 = avx2_table();
  if (avx2 != nullptr && cpu_has_avx2()) return *avx2;
  return scalar_table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

std::string_view active_name() { return active().name; }

}  // namespace hsurf::kernels
