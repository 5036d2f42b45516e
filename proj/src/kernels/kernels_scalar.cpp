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

#include <cmath>

#include "hsurf/kernels.hpp"

namespace hsurf::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpby_scalar(const double* x, double b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + b * y[i];
}

void hadamard_scalar(const double* a, const double* b, double* out,
                     std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void spmv_scalar(const CsrView& A, const double* x, double* y) {
  for (std::size_t r = 0; r < A.rows; ++r) {
    double sum = 0.0;
    for (std::int32_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) {
      sum += A.vals[k] * x[A.cols[k]];
    }
    y[r] = sum;
  }
}

void flux_scalar(const FluxBatch& f) {
  for (std::size_t i = 0; i < f.count; ++i) {
    const double zx = f.zx[i];
    const double zy = f.zy[i];
    const double s = 1.0 + zx * zx + zy * zy;
    const double w = std::sqrt(s);
    const double inv_w = 1.0 / w;
    const double inv_w3 = inv_w / s;
    f.hx[i] = zx * inv_w;
    f.hy[i] = zy * inv_w;
    // Dh = s^{-3/2} [ s I - z z^T ]; the diagonal is written without the
    // cancelling s - z_k^2 form.
    f.d11[i] = (1.0 + zy * zy) * inv_w3;
    f.d12[i] = -(zx * zy) * inv_w3;
    f.d22[i] = (1.0 + zx * zx) * inv_w3;
    f.w[i] = w;
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar",        dot_scalar,  axpy_scalar,
                                 xpby_scalar,     hadamard_scalar,
                                 spmv_scalar,     flux_scalar};
  return table;
}

}  // namespace hsurf::kernels
