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

#include "hsurf/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hsurf/error.hpp"

namespace hsurf {

CsrMatrix CsrMatrix::from_pattern(
    std::size_t n, std::vector<std::pair<std::int32_t, std::int32_t>> entries) {
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  CsrMatrix m;
  m.row_ptr_.assign(n + 1, 0);
  m.cols_.reserve(entries.size());
  for (const auto& [r, c] : entries) {
    m.row_ptr_[static_cast<std::size_t>(r) + 1]++;
    m.cols_.push_back(c);
  }
  for (std::size_t i = 0; i < n; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
  m.vals_.assign(m.cols_.size(), 0.0);
  return m;
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  std::vector<std::pair<std::int32_t, std::int32_t>> e;
  e.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    e.emplace_back(static_cast<std::int32_t>(i), static_cast<std::int32_t>(i));
  }
  CsrMatrix m = from_pattern(n, std::move(e));
  std::fill(m.vals_.begin(), m.vals_.end(), 1.0);
  return m;
}

std::int64_t CsrMatrix::find(std::int32_t r, std::int32_t c) const {
  const auto begin = cols_.begin() + row_ptr_[r];
  const auto end = cols_.begin() + row_ptr_[r + 1];
  const auto it = std::lower_bound(begin, end, c);
  if (it == end || *it != c) return -1;
  return it - cols_.begin();
}

void CsrMatrix::add(std::int32_t r, std::int32_t c, double v) {
  const std::int64_t k = find(r, c);
  if (k < 0) {
    throw Error("CsrMatrix::add outside pattern (" + std::to_string(r) + ", " +
                std::to_string(c) + ")");
  }
  vals_[static_cast<std::size_t>(k)] += v;
}

double CsrMatrix::at(std::int32_t r, std::int32_t c) const {
  const std::int64_t k = find(r, c);
  return k < 0 ? 0.0 : vals_[static_cast<std::size_t>(k)];
}

void CsrMatrix::set_zero() { std::fill(vals_.begin(), vals_.end(), 0.0); }

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  kernels::spmv(view(), x, y);
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(rows());
  multiply(x, y);
  return y;
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(rows());
  for (std::size_t r = 0; r < rows(); ++r) {
    d[r] = at(static_cast<std::int32_t>(r), static_cast<std::int32_t>(r));
  }
  return d;
}

double CsrMatrix::asymmetry() const {
  double worst = 0.0;
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::int32_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const double other = at(cols_[k], static_cast<std::int32_t>(r));
      worst = std::max(worst, std::abs(vals_[k] - other));
    }
  }
  return worst;
}

CsrMatrix CsrMatrix::submatrix(const std::vector<bool>& kept) const {
  std::vector<std::int32_t> remap(rows(), -1);
  std::int32_t count = 0;
  for (std::size_t i = 0; i < rows(); ++i) {
    if (kept[i]) remap[i] = count++;
  }
  CsrMatrix out;
  out.row_ptr_.assign(static_cast<std::size_t>(count) + 1, 0);
  for (std::size_t r = 0; r < rows(); ++r) {
    if (remap[r] < 0) continue;
    for (std::int32_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const std::int32_t c = remap[static_cast<std::size_t>(cols_[k])];
      if (c < 0) continue;
      out.cols_.push_back(c);
      out.vals_.push_back(vals_[k]);
    }
    out.row_ptr_[static_cast<std::size_t>(remap[r]) + 1] =
        static_cast<std::int32_t>(out.cols_.size());
  }
  return out;
}

double norm2(std::span<const double> x) { return std::sqrt(kernels::dot(x, x)); }

CgResult conjugate_gradient(const CsrMatrix& A, std::span<const double> b,
                            std::span<double> x, const CgOptions& opts) {
  const std::size_t n = A.rows();
  CgResult result;
  if (n == 0) {
    result.converged = true;
    return result;
  }
  std::vector<double> inv_diag = A.diagonal();
  for (double& d : inv_diag) {
    if (!(d > 0.0)) {
      throw SolverError(SolverError::Kind::NotPositiveDefinite,
                        "conjugate gradients: non-positive diagonal entry");
    }
    d = 1.0 / d;
  }
  std::vector<double> r(n), z(n), p(n), q(n);
  A.multiply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  const double b_norm = norm2(b);
  const double target = std::max(opts.rel_tol * b_norm, opts.abs_tol);
  const int max_iter = opts.max_iter > 0 ? opts.max_iter : static_cast<int>(10 * n + 100);

  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    result.converged = true;
    return result;
  }
  double r_norm = norm2(r);
  result.residual = r_norm;
  if (r_norm <= target) {
    result.converged = true;
    return result;
  }
  kernels::hadamard(inv_diag, r, z);
  p = z;
  double rz = kernels::dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    A.multiply(p, q);
    const double pq = kernels::dot(p, q);
    if (!(pq > 0.0)) {
      throw SolverError(SolverError::Kind::NotPositiveDefinite,
                        "conjugate gradients: p^T A p = " + std::to_string(pq) +
                            " (matrix not positive definite)");
    }
    const double alpha = rz / pq;
    kernels::axpy(alpha, p, x);
    kernels::axpy(-alpha, q, r);
    r_norm = norm2(r);
    result.iterations = it;
    result.residual = r_norm;
    if (r_norm <= target) {
      result.converged = true;
      return result;
    }
    kernels::hadamard(inv_diag, r, z);
    const double rz_next = kernels::dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    kernels::xpby(z, beta, p);
  }
  return result;
}

}  // namespace hsurf
