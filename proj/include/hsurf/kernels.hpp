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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace hsurf::kernels {

// Compressed sparse row view; column indices are 32-bit so the AVX2 gather
// path can load them directly.
struct CsrView {
  std::size_t rows = 0;
  const std::int32_t* row_ptr = nullptr;
  const std::int32_t* cols = nullptr;
  const double* vals = nullptr;
};

// Structure-of-arrays batch for the mean-curvature flux h(z) = z/sqrt(1+|z|^2)
// and its Jacobian Dh(z), symmetric, stored as (d11, d12, d22). `w` receives
// the area density sqrt(1+|z|^2).
struct FluxBatch {
  std::size_t count = 0;
  const double* zx = nullptr;
  const double* zy = nullptr;
  double* hx = nullptr;
  double* hy = nullptr;
  double* d11 = nullptr;
  double* d12 = nullptr;
  double* d22 = nullptr;
  double* w = nullptr;
};

// One implementation of every data-parallel inner loop.
struct KernelTable {
  const char* name;
  double (*dot)(const double* x, const double* y, std::size_t n);
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*xpby)(const double* x, double b, double* y, std::size_t n);
  void (*hadamard)(const double* a, const double* b, double* out, std::size_t n);
  void (*spmv)(const CsrView& A, const double* x, double* y);
  void (*flux)(const FluxBatch& batch);
};

const KernelTable& scalar_table();

// Null when the binary was built without AVX2 support.
const KernelTable* avx2_table();

bool cpu_has_avx2();

// Selected once per process: HSURF_SIMD=scalar|avx2|auto (default auto).
const KernelTable& active();

std::string_view active_name();

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}

// y <- x + b*y
inline void xpby(std::span<const double> x, double b, std::span<double> y) {
  active().xpby(x.data(), b, y.data(), x.size());
}

inline void hadamard(std::span<const double> a, std::span<const double> b,
                     std::span<double> out) {
  active().hadamard(a.data(), b.data(), out.data(), a.size());
}

inline void spmv(const CsrView& A, std::span<const double> x,
                 std::span<double> y) {
  active().spmv(A, x.data(), y.data());
}

inline void flux(const FluxBatch& batch) { active().flux(batch); }

}  // namespace hsurf::kernels
