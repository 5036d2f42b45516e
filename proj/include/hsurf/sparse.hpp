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
#include <span>
#include <utility>
#include <vector>

#include "hsurf/kernels.hpp"

namespace hsurf {

// Square CSR matrix with sorted column indices per row.
class CsrMatrix {
 public:
  CsrMatrix() = default;

  // Builds the sparsity pattern from (row, col) pairs; values start at zero.
  static CsrMatrix from_pattern(std::size_t n,
                                std::vector<std::pair<std::int32_t, std::int32_t>> entries);

  static CsrMatrix identity(std::size_t n);

  std::size_t rows() const { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t nonzeros() const { return vals_.size(); }

  // Index of (r, c) in the value array, or -1 when outside the pattern.
  std::int64_t find(std::int32_t r, std::int32_t c) const;
  void add(std::int32_t r, std::int32_t c, double v);
  double at(std::int32_t r, std::int32_t c) const;
  void set_zero();

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<double> diagonal() const;

  // max |A_ij - A_ji| over the pattern.
  double asymmetry() const;

  // Rows/columns kept[i] == true, renumbered in order.
  CsrMatrix submatrix(const std::vector<bool>& kept) const;

  kernels::CsrView view() const {
    return {rows(), row_ptr_.data(), cols_.data(), vals_.data()};
  }
  std::span<const std::int32_t> row_ptr() const { return row_ptr_; }
  std::span<const std::int32_t> cols() const { return cols_; }
  std::span<const double> values() const { return vals_; }
  std::span<double> values() { return vals_; }

 private:
  std::vector<std::int32_t> row_ptr_;
  std::vector<std::int32_t> cols_;
  std::vector<double> vals_;
};

struct CgOptions {
  double rel_tol = 1e-12;
  double abs_tol = 0.0;
  int max_iter = 0;  // 0 selects 10 * rows + 100
};

struct CgResult {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Jacobi-preconditioned conjugate gradients. Throws SolverError with
// Kind::NotPositiveDefinite when a search direction has p^T A p <= 0.
CgResult conjugate_gradient(const CsrMatrix& A, std::span<const double> b,
                            std::span<double> x, const CgOptions& opts = {});

double norm2(std::span<const double> x);

}  // namespace hsurf
