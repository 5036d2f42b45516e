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

#include "hsurf/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define HSURF_HAVE_AVX2_PATH 1
#include <immintrin.h>
#else
#define HSURF_HAVE_AVX2_PATH 0
#endif

namespace hsurf::kernels {

#if HSURF_HAVE_AVX2_PATH

#define HSURF_AVX2 __attribute__((target("avx2,fma")))

namespace {

HSURF_AVX2 inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

HSURF_AVX2 double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4),
                           _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

HSURF_AVX2 void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

HSURF_AVX2 void xpby_avx2(const double* x, double b, double* y, std::size_t n) {
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(vb, _mm256_loadu_pd(y + i),
                                            _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) y[i] = x[i] + b * y[i];
}

HSURF_AVX2 void hadamard_avx2(const double* a, const double* b, double* out,
                              std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i,
                     _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

HSURF_AVX2 void spmv_avx2(const CsrView& A, const double* x, double* y) {
  for (std::size_t r = 0; r < A.rows; ++r) {
    std::int32_t k = A.row_ptr[r];
    const std::int32_t end = A.row_ptr[r + 1];
    __m256d acc = _mm256_setzero_pd();
    for (; k + 4 <= end; k += 4) {
      const __m128i idx =
          _mm_loadu_si128(reinterpret_cast<const __m128i*>(A.cols + k));
      const __m256d xv = _mm256_i32gather_pd(x, idx, 8);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(A.vals + k), xv, acc);
    }
    double sum = hsum(acc);
    for (; k < end; ++k) sum += A.vals[k] * x[A.cols[k]];
    y[r] = sum;
  }
}

HSURF_AVX2 void flux_avx2(const FluxBatch& f) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= f.count; i += 4) {
    const __m256d zx = _mm256_loadu_pd(f.zx + i);
    const __m256d zy = _mm256_loadu_pd(f.zy + i);
    const __m256d zx2 = _mm256_mul_pd(zx, zx);
    const __m256d zy2 = _mm256_mul_pd(zy, zy);
    const __m256d s = _mm256_add_pd(_mm256_add_pd(one, zx2), zy2);
    const __m256d w = _mm256_sqrt_pd(s);
    const __m256d inv_w = _mm256_div_pd(one, w);
    const __m256d inv_w3 = _mm256_div_pd(inv_w, s);
    _mm256_storeu_pd(f.hx + i, _mm256_mul_pd(zx, inv_w));
    _mm256_storeu_pd(f.hy + i, _mm256_mul_pd(zy, inv_w));
    _mm256_storeu_pd(f.d11 + i, _mm256_mul_pd(_mm256_add_pd(one, zy2), inv_w3));
    _mm256_storeu_pd(f.d12 + i,
                     _mm256_xor_pd(_mm256_mul_pd(_mm256_mul_pd(zx, zy), inv_w3), sign));
    _mm256_storeu_pd(f.d22 + i, _mm256_mul_pd(_mm256_add_pd(one, zx2), inv_w3));
    _mm256_storeu_pd(f.w + i, w);
  }
  if (i < f.count) {
    FluxBatch tail = f;
    tail.count = f.count - i;
    tail.zx += i;
    tail.zy += i;
    tail.hx += i;
    tail.hy += i;
    tail.d11 += i;
    tail.d12 += i;
    tail.d22 += i;
    tail.w += i;
    scalar_table().flux(tail);
  }
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{"avx2",       dot_avx2,      axpy_avx2,
                                 xpby_avx2,    hadamard_avx2, spmv_avx2,
                                 flux_avx2};
  return &table;
}

bool cpu_has_avx2() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

#else

const KernelTable* avx2_table() { return nullptr; }
bool cpu_has_avx2() { return false; }

#endif

}  // namespace hsurf::kernels
