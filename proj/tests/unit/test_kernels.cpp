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

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hsurf/error.hpp"
#include "hsurf/kernels.hpp"
#include "hsurf/sparse.hpp"

using namespace hsurf;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

CsrMatrix random_csr(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::pair<std::int32_t, std::int32_t>> e;
  std::uniform_int_distribution<std::int32_t> col(0, static_cast<std::int32_t>(n) - 1);
  for (std::size_t r = 0; r < n; ++r) {
    e.emplace_back(static_cast<std::int32_t>(r), static_cast<std::int32_t>(r));
    const int extra = static_cast<int>(r % 11);
    for (int k = 0; k < extra; ++k) e.emplace_back(static_cast<std::int32_t>(r), col(rng));
  }
  CsrMatrix A = CsrMatrix::from_pattern(n, e);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : A.values()) v = u(rng);
  return A;
}

}  // namespace

TEST_CASE("active table is one of the known implementations") {
  const std::string_view name = kernels::active_name();
  CHECK((name == "scalar" || name == "avx2"));
  if (!kernels::cpu_has_avx2()) CHECK(name == "scalar");
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const kernels::KernelTable* simd = kernels::avx2_table();
  if (simd == nullptr) {
    MESSAGE("AVX2 unavailable; equivalence test skipped");
    return;
  }
  const kernels::KernelTable& ref = kernels::scalar_table();
  std::mt19937_64 rng(42);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 31u, 1000u, 1027u}) {
    CAPTURE(n);
    const auto x = random_vector(n, rng);
    const auto y0 = random_vector(n, rng);

    const double d_ref = ref.dot(x.data(), y0.data(), n);
    const double d_simd = simd->dot(x.data(), y0.data(), n);
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(x[i] * y0[i]);
    CHECK(std::abs(d_ref - d_simd) <= 1e-15 * (mag + 1.0) * 4);

    auto y1 = y0, y2 = y0;
    ref.axpy(0.37, x.data(), y1.data(), n);
    simd->axpy(0.37, x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-15);

    y1 = y0;
    y2 = y0;
    ref.xpby(x.data(), -1.3, y1.data(), n);
    simd->xpby(x.data(), -1.3, y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-15);

    std::vector<double> h1(n), h2(n);
    ref.hadamard(x.data(), y0.data(), h1.data(), n);
    simd->hadamard(x.data(), y0.data(), h2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(h1[i] == h2[i]);
  }
}

TEST_CASE("avx2 spmv agrees with the scalar reference") {
  const kernels::KernelTable* simd = kernels::avx2_table();
  if (simd == nullptr) return;
  std::mt19937_64 rng(7);
  for (std::size_t n : {1u, 5u, 64u, 513u}) {
    const CsrMatrix A = random_csr(n, rng);
    const auto x = random_vector(n, rng);
    std::vector<double> y1(n), y2(n);
    kernels::scalar_table().spmv(A.view(), x.data(), y1.data());
    simd->spmv(A.view(), x.data(), y2.data());
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-14);
  }
}

TEST_CASE("avx2 flux batch agrees with the scalar reference") {
  const kernels::KernelTable* simd = kernels::avx2_table();
  if (simd == nullptr) return;
  std::mt19937_64 rng(11);
  const std::size_t n = 1003;
  auto zx = random_vector(n, rng, 50.0);
  auto zy = random_vector(n, rng, 50.0);
  zx[0] = zy[0] = 0.0;
  zx[1] = 1e6;
  zy[2] = -1e-9;
  std::vector<std::vector<double>> a(6, std::vector<double>(n)), b = a;
  auto run = [&](const kernels::KernelTable& k, std::vector<std::vector<double>>& o) {
    kernels::FluxBatch batch{n, zx.data(), zy.data(), o[0].data(), o[1].data(),
                             o[2].data(), o[3].data(), o[4].data(), o[5].data()};
    k.flux(batch);
  };
  run(kernels::scalar_table(), a);
  run(*simd, b);
  for (std::size_t c = 0; c < 6; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(a[c][i] - b[c][i]) <= 1e-14 * (1.0 + std::abs(a[c][i])));
    }
  }
  CHECK(a[2][0] == 1.0);
  CHECK(a[3][0] == 0.0);
  CHECK(a[4][0] == 1.0);
}

TEST_CASE("conjugate gradients solves a 1D Laplacian") {
  const std::size_t n = 200;
  std::vector<std::pair<std::int32_t, std::int32_t>> e;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::int32_t>(i);
    e.emplace_back(r, r);
    if (i > 0) e.emplace_back(r, r - 1);
    if (i + 1 < n) e.emplace_back(r, r + 1);
  }
  CsrMatrix A = CsrMatrix::from_pattern(n, e);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::int32_t>(i);
    A.add(r, r, 2.0);
    if (i > 0) A.add(r, r - 1, -1.0);
    if (i + 1 < n) A.add(r, r + 1, -1.0);
  }
  std::vector<double> xs(n), b;
  for (std::size_t i = 0; i < n; ++i) xs[i] = std::sin(0.1 * static_cast<double>(i));
  b = A.multiply(xs);
  std::vector<double> x(n, 0.0);
  const CgResult res = conjugate_gradient(A, b, x);
  CHECK(res.converged);
  for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(xs[i]).epsilon(1e-8));
  CHECK(A.asymmetry() == 0.0);
}

TEST_CASE("conjugate gradients reports an indefinite matrix") {
  CsrMatrix A = CsrMatrix::identity(3);
  A.values()[1] = -1.0;
  std::vector<double> b{1.0, 1.0, 1.0}, x(3, 0.0);
  CHECK_THROWS_AS(conjugate_gradient(A, b, x), hsurf::Error);
}
